#include "gradphi/events.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gradphi/error.hpp"
#include "gradphi/rng.hpp"

namespace gradphi {

namespace {

Philox4x32::Key stream_key(std::uint64_t seed) {
  const std::uint64_t k = splitmix64(seed ^ hash_label("events"));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Philox4x32::Counter counter(int site, std::uint64_t index, std::uint32_t lane) {
  return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
          static_cast<std::uint32_t>(site), lane};
}

std::uint64_t word(const Philox4x32::Counter& c, int i) {
  return (std::uint64_t{c[static_cast<std::size_t>(2 * i)]} << 32) | c[static_cast<std::size_t>(2 * i + 1)];
}

}  // namespace

EventStream::EventStream(std::uint64_t seed, int n, double horizon) : seed_(seed), n_(n), horizon_(horizon) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("event stream needs N >= 2, got {}", n));
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    fail(ErrorCode::kInvalidArgument, fmt::format("event stream horizon must be finite and >= 0, got {}", horizon));
}

EventStream EventStream::from_events(int n, double horizon, std::vector<Event> events) {
  EventStream s(0, n, horizon);
  double last = 0.0;
  for (const Event& e : events) {
    if (e.site < 1 || e.site > n - 1)
      fail(ErrorCode::kInvalidArgument, fmt::format("replayed event site {} outside 1..{}", e.site, n - 1));
    if (!(e.time >= last)) fail(ErrorCode::kInvalidArgument, fmt::format("replayed events out of order at t={}", e.time));
    for (double u : e.u)
      if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::kInvalidArgument, fmt::format("replayed uniform {} outside (0,1)", u));
    last = e.time;
  }
  std::erase_if(events, [&](const Event& e) { return e.time > horizon; });
  s.explicit_ = std::make_shared<const std::vector<Event>>(std::move(events));
  return s;
}

double EventStream::interarrival(int site, std::uint64_t index) const noexcept {
  const auto b = Philox4x32::block(counter(site, index, 0), stream_key(seed_));
  return -std::log(open_unit(word(b, 0)));
}

std::array<double, 4> EventStream::uniforms(int site, std::uint64_t index) const noexcept {
  const auto key = stream_key(seed_);
  const auto b0 = Philox4x32::block(counter(site, index, 0), key);
  const auto b1 = Philox4x32::block(counter(site, index, 1), key);
  return {open_unit(word(b0, 1)), open_unit(word(b1, 0)), open_unit(word(b1, 1)),
          open_unit(word(Philox4x32::block(counter(site, index, 2), key), 0))};
}

EventStream::Cursor::Cursor(const EventStream& s, int uniforms) : stream_(&s), uniforms_(std::clamp(uniforms, 1, 4)) {
  if (s.explicit_) return;
  index_.assign(static_cast<std::size_t>(s.n_), 0);
  for (int k = 1; k < s.n_; ++k) {
    const double t = s.interarrival(k, 0);
    if (t <= s.horizon_) heap_.push({t, k});
  }
}

bool EventStream::Cursor::next(Event& out) {
  const EventStream& s = *stream_;
  if (s.explicit_) {
    if (pos_ >= s.explicit_->size()) return false;
    out = (*s.explicit_)[pos_++];
    return true;
  }
  if (heap_.empty()) return false;
  const Clock c = heap_.top();
  heap_.pop();
  auto& idx = index_[static_cast<std::size_t>(c.site)];
  const auto key = stream_key(s.seed_);
  const auto b0 = Philox4x32::block(counter(c.site, idx, 0), key);
  out.time = c.time;
  out.site = c.site;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  out.u = {open_unit(word(b0, 1)), nan, nan, nan};
  if (uniforms_ > 1) {
    const auto b1 = Philox4x32::block(counter(c.site, idx, 1), key);
    out.u[1] = open_unit(word(b1, 0));
    out.u[2] = open_unit(word(b1, 1));
    if (uniforms_ > 3) out.u[3] = open_unit(word(Philox4x32::block(counter(c.site, idx, 2), key), 0));
  }
  ++idx;
  const double t = c.time + s.interarrival(c.site, idx);
  if (t <= s.horizon_) heap_.push({t, c.site});
  return true;
}

std::vector<Event> EventStream::materialise() const {
  std::vector<Event> out;
  auto cur = cursor(4);
  Event e;
  while (cur.next(e)) out.push_back(e);
  return out;
}

void write_replay(std::ostream& os, const std::vector<Event>& events) {
  for (const Event& e : events)
    os << fmt::format("{:.17g} {} {:.17g} {:.17g} {:.17g} {:.17g}\n", e.time, e.site, e.u[0], e.u[1], e.u[2], e.u[3]);
}

std::vector<Event> read_replay(std::istream& is) {
  std::vector<Event> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    Event e;
    if (!(ls >> e.time >> e.site >> e.u[0] >> e.u[1] >> e.u[2] >> e.u[3]))
      fail(ErrorCode::kIo, fmt::format("replay line {}: expected \"t k u1 u2 u3 u4\"", lineno));
    out.push_back(e);
  }
  return out;
}

CensoringScheme::CensoringScheme(std::vector<CensorInterval> intervals) : intervals_(std::move(intervals)) {
  std::sort(intervals_.begin(), intervals_.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    auto& iv = intervals_[i];
    if (!(iv.start <= iv.end))
      fail(ErrorCode::kInvalidArgument, fmt::format("censoring interval [{}, {}) is reversed", iv.start, iv.end));
    if (i > 0 && iv.start < intervals_[i - 1].end)
      fail(ErrorCode::kInvalidArgument,
           fmt::format("censoring intervals [{}, {}) and [{}, {}) overlap", intervals_[i - 1].start,
                       intervals_[i - 1].end, iv.start, iv.end));
    std::sort(iv.sites.begin(), iv.sites.end());
    iv.sites.erase(std::unique(iv.sites.begin(), iv.sites.end()), iv.sites.end());
  }
}

CensoringScheme CensoringScheme::sites_on(std::vector<int> sites, double start, double end) {
  return CensoringScheme({CensorInterval{start, end, std::move(sites)}});
}

bool CensoringScheme::censored(double t, int site) const noexcept {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](double v, const CensorInterval& iv) { return v < iv.start; });
  if (it == intervals_.begin()) return false;
  --it;
  if (t >= it->end) return false;
  return std::binary_search(it->sites.begin(), it->sites.end(), site);
}

void CensoringScheme::validate_for(int n) const {
  for (const auto& iv : intervals_)
    for (int k : iv.sites)
      if (k < 1 || k > n - 1) fail(ErrorCode::kInvalidArgument, fmt::format("censored site {} outside 1..{}", k, n - 1));
}

}  // namespace gradphi
