#include <cstdlib>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("vmmr");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  if (const char* level = std::getenv("VMMR_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::warn);
  }
  return vmmr::cli::run_cli(argc, argv, std::cout, std::cerr);
}
