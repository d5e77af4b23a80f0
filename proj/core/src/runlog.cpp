#include "vmmr/runlog.hpp"

#include "json.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

using ordered_json = nlohmann::ordered_json;

TruthMap parse_truths(std::string_view content) {
  TruthMap truths;
  std::size_t line_no = 0;
  for (auto line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string where = "truths line " + std::to_string(line_no);
    if (fields.size() != 3 || trim(fields[0]).empty()) {
      throw Error(ErrorCode::kSchemaError, where + ": expected query_id<TAB>make<TAB>model");
    }
    auto label = canonicalize_label(fields[1], fields[2]);
    if (!truths.emplace(std::string(trim(fields[0])), std::move(label)).second) {
      throw Error(ErrorCode::kSchemaError, where + ": duplicate query id");
    }
  }
  return truths;
}

TruthMap load_truths(const std::filesystem::path& path) {
  return parse_truths(read_text_file(path));
}

namespace {

ordered_json label_json(const VehicleLabel& label) {
  return {{"make", label.make()}, {"model", label.model()}};
}

}  // namespace

std::string run_log_line(const BatchEntry& entry, const TruthMap* truths,
                         const RunLogOptions& options) {
  ordered_json j;
  j["query_id"] = entry.query_id;
  const Prediction* p = entry.prediction ? &*entry.prediction : nullptr;

  j["description"] = p && p->description_used ? ordered_json(p->description_used->text())
                                               : ordered_json(nullptr);
  ordered_json hits = ordered_json::array();
  if (p) {
    for (std::size_t i = 0; i < p->hits.size(); ++i) {
      const auto& h = p->hits[i];
      ordered_json hit = {{"record_id", h.record_id}};
      hit["label"] = i < p->hit_labels.size() ? label_json(p->hit_labels[i]) : ordered_json(nullptr);
      hit["score"] = h.score;
      hit["rank"] = h.rank;
      hits.push_back(std::move(hit));
    }
  }
  j["hits"] = std::move(hits);
  j["prompt_hash"] = p ? ordered_json(p->prompt_hash) : ordered_json(nullptr);
  j["raw_reasoner_text"] = p ? ordered_json(p->raw_reasoner_text) : ordered_json(nullptr);
  j["label"] = p && p->label ? ordered_json(p->label->canonical_id()) : ordered_json(nullptr);
  j["make"] = p && p->label ? ordered_json(p->label->make()) : ordered_json(nullptr);
  j["model"] = p && p->label ? ordered_json(p->label->model()) : ordered_json(nullptr);
  j["match_rule"] = p ? ordered_json(to_string(p->match_rule)) : ordered_json(nullptr);

  j["true_label"] = nullptr;
  if (truths) {
    if (auto it = truths->find(entry.query_id); it != truths->end()) {
      j["true_label"] = label_json(it->second);
    }
  }

  const StageLatency lat = p && options.include_timings ? p->latency : StageLatency{};
  j["latency_ms"] = {{"describe", lat.describe_ms},
                     {"embed", lat.embed_ms},
                     {"retrieve", lat.retrieve_ms},
                     {"reason", lat.reason_ms}};

  if (entry.failure) {
    j["error"] = {{"stage", entry.failure->stage},
                  {"code", error_code_name(entry.failure->code)},
                  {"message", entry.failure->message}};
  } else {
    j["error"] = nullptr;
  }
  return j.dump();
}

std::string serialize_run_log(std::span<const BatchEntry> entries, const TruthMap* truths,
                              const RunLogOptions& options) {
  std::string out;
  for (const auto& e : entries) {
    out += run_log_line(e, truths, options);
    out += '\n';
  }
  return out;
}

namespace {

ErrorCode code_from_name(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kBackendProtocolError); ++c) {
    if (error_code_name(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  return ErrorCode::kInvalidInput;
}

std::string str_or_empty(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

RunLog parse_run_log(std::string_view content) {
  RunLog log;
  std::size_t line_no = 0;
  for (auto line : split(content, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "run log line " + std::to_string(line_no);
    try {
      const auto j = ordered_json::parse(line);
      BatchEntry entry;
      entry.query_id = j.at("query_id").get<std::string>();

      if (auto t = j.find("true_label"); t != j.end() && t->is_object()) {
        log.truths.emplace(entry.query_id, canonicalize_label(t->at("make").get<std::string>(),
                                                              t->at("model").get<std::string>()));
      }
      if (auto err = j.find("error"); err != j.end() && err->is_object()) {
        entry.failure = QueryFailure{str_or_empty(*err, "stage"),
                                     code_from_name(str_or_empty(*err, "code")),
                                     str_or_empty(*err, "message")};
        log.entries.push_back(std::move(entry));
        continue;
      }

      Prediction p;
      p.query_id = entry.query_id;
      if (auto d = j.find("description"); d != j.end() && d->is_string()) {
        p.description_used = Description(d->get<std::string>());
      }
      for (const auto& h : j.at("hits")) {
        p.hits.push_back({h.at("record_id").get<std::string>(), h.at("score").get<double>(),
                          h.at("rank").get<std::size_t>()});
        if (auto l = h.find("label"); l != h.end() && l->is_object()) {
          p.hit_labels.push_back(canonicalize_label(l->at("make").get<std::string>(),
                                                    l->at("model").get<std::string>()));
        }
      }
      if (p.hit_labels.size() != p.hits.size()) p.hit_labels.clear();
      p.prompt_hash = str_or_empty(j, "prompt_hash");
      p.raw_reasoner_text = str_or_empty(j, "raw_reasoner_text");
      const auto rule = parse_match_rule(str_or_empty(j, "match_rule"));
      if (!rule) throw Error(ErrorCode::kSchemaError, where + ": bad match_rule");
      p.match_rule = *rule;
      if (j.contains("make") && j["make"].is_string()) {
        p.label = canonicalize_label(j["make"].get<std::string>(), j["model"].get<std::string>());
      }
      if (auto lat = j.find("latency_ms"); lat != j.end() && lat->is_object()) {
        p.latency = {lat->value("describe", 0.0), lat->value("embed", 0.0),
                     lat->value("retrieve", 0.0), lat->value("reason", 0.0)};
      }
      entry.prediction = std::move(p);
      log.entries.push_back(std::move(entry));
    } catch (const ordered_json::exception& e) {
      throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kSchemaError) throw;
      throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
    }
  }
  return log;
}

RunLog load_run_log(const std::filesystem::path& path) {
  return parse_run_log(read_text_file(path));
}

}  // namespace vmmr
