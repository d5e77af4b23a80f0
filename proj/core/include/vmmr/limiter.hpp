#pragma once

#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>

namespace vmmr {

/// Caps the number of concurrent backend requests. Shared between clients
/// through a shared_ptr so one cap can span describer and reasoner calls.
class RequestLimiter {
 public:
  explicit RequestLimiter(std::size_t max_in_flight);

  class Permit {
   public:
    explicit Permit(RequestLimiter& owner) : owner_(&owner) {}
    Permit(Permit&& other) noexcept : owner_(other.owner_) { other.owner_ = nullptr; }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Permit& operator=(Permit&&) = delete;
    ~Permit();

   private:
    RequestLimiter* owner_;
  };

  [[nodiscard]] Permit acquire();

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t in_flight() const;
  std::size_t peak_in_flight() const;

 private:
  void release();

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

inline constexpr std::size_t kDefaultMaxInFlight = 4;

}  // namespace vmmr
