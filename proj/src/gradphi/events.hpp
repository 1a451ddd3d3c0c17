#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <queue>
#include <string>
#include <vector>

namespace gradphi {

struct Event {
  double time = 0.0;
  int site = 0;
  std::array<double, 4> u{};

  friend bool operator==(const Event&, const Event&) = default;
};

// Rate-1 Poisson clocks on sites 1..N-1, each ring carrying four uniforms.
// Event i at site k is a pure function of (seed, k, i), so streams with the
// same seed agree on the overlap of their horizons.
class EventStream {
 public:
  EventStream(std::uint64_t seed, int n, double horizon);
  // Explicit event list (replay); must be time-ordered with sites in 1..N-1.
  static EventStream from_events(int n, double horizon, std::vector<Event> events);

  std::uint64_t seed() const noexcept { return seed_; }
  int size() const noexcept { return n_; }
  double horizon() const noexcept { return horizon_; }
  bool replayed() const noexcept { return explicit_ != nullptr; }

  // Uniforms u[0..uniforms-1] are filled; the others are left NaN.
  class Cursor {
   public:
    bool next(Event& out);

   private:
    friend class EventStream;
    Cursor(const EventStream& s, int uniforms);
    struct Clock {
      double time;
      int site;
      bool operator>(const Clock& o) const noexcept {
        return time > o.time || (time == o.time && site > o.site);
      }
    };
    const EventStream* stream_;
    int uniforms_;
    std::vector<std::uint64_t> index_;
    std::priority_queue<Clock, std::vector<Clock>, std::greater<>> heap_;
    std::size_t pos_ = 0;
  };

  Cursor cursor(int uniforms = 4) const { return Cursor(*this, uniforms); }
  std::vector<Event> materialise() const;

  // Event index i at site k (independent of horizon).
  std::array<double, 4> uniforms(int site, std::uint64_t index) const noexcept;
  double interarrival(int site, std::uint64_t index) const noexcept;

 private:
  std::uint64_t seed_ = 0;
  int n_ = 0;
  double horizon_ = 0.0;
  std::shared_ptr<const std::vector<Event>> explicit_;
};

// Text replay format: one line "t k u1 u2 u3 u4" per event.
void write_replay(std::ostream& os, const std::vector<Event>& events);
std::vector<Event> read_replay(std::istream& is);

// Sites whose updates are suppressed on [start, end).
struct CensorInterval {
  double start = 0.0;
  double end = 0.0;
  std::vector<int> sites;
};

class CensoringScheme {
 public:
  CensoringScheme() = default;
  // Throws kInvalidArgument on overlapping or malformed intervals.
  explicit CensoringScheme(std::vector<CensorInterval> intervals);
  static CensoringScheme sites_on(std::vector<int> sites, double start, double end);

  bool empty() const noexcept { return intervals_.empty(); }
  bool censored(double t, int site) const noexcept;
  void validate_for(int n) const;
  const std::vector<CensorInterval>& intervals() const noexcept { return intervals_; }

 private:
  std::vector<CensorInterval> intervals_;
};

}  // namespace gradphi
