#pragma once
// Sampled trajectory storage.
//
// Samples live in flat parallel arrays (time, strided state, multiplier,
// mode tag) so long runs cost no per-sample allocations.  Events carry the
// discrete history: surface strikes, slide starts and ends, crossings.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hidyn {

enum class Mode : std::uint8_t { FreePlus, FreeMinus, Sliding, InLayerTransit };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::FreePlus: return "free+";
    case Mode::FreeMinus: return "free-";
    case Mode::Sliding: return "sliding";
    default: return "transit";
  }
}

enum class EventKind : std::uint8_t {
  SurfaceHit,
  CrossExit,
  SlideStart,
  SlideEndBoundary,
  SlideEndFold,
  DegenerateHalt,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::SurfaceHit: return "surface_hit";
    case EventKind::CrossExit: return "cross_exit";
    case EventKind::SlideStart: return "slide_start";
    case EventKind::SlideEndBoundary: return "slide_end_boundary";
    case EventKind::SlideEndFold: return "slide_end_fold";
    default: return "degenerate_halt";
  }
}

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::SurfaceHit;
};

class Trajectory {
 public:
  explicit Trajectory(int n = 0) : n_(n) {}

  int dim() const { return n_; }
  std::size_t size() const { return ts_.size(); }
  bool empty() const { return ts_.empty(); }

  void push(double t, std::span<const double> x, double lam, Mode mode) {
    ts_.push_back(t);
    xs_.insert(xs_.end(), x.begin(), x.end());
    lams_.push_back(lam);
    modes_.push_back(mode);
  }

  void add_event(double t, EventKind kind) { events_.push_back({t, kind}); }

  double t(std::size_t i) const { return ts_[i]; }
  std::span<const double> x(std::size_t i) const {
    return {xs_.data() + i * n_, static_cast<std::size_t>(n_)};
  }
  double lam(std::size_t i) const { return lams_[i]; }
  Mode mode(std::size_t i) const { return modes_[i]; }

  std::span<const double> times() const { return ts_; }
  std::span<const double> lambdas() const { return lams_; }
  std::span<const Mode> modes() const { return modes_; }
  std::span<const Event> events() const { return events_; }

  double back_t() const { return ts_.back(); }
  std::span<const double> back_x() const { return x(size() - 1); }

  void reserve(std::size_t count) {
    ts_.reserve(count);
    xs_.reserve(count * n_);
    lams_.reserve(count);
    modes_.reserve(count);
  }

  // Moves all samples and events of other onto the end of this trajectory.
  void append(Trajectory&& other) {
    ts_.insert(ts_.end(), other.ts_.begin(), other.ts_.end());
    xs_.insert(xs_.end(), other.xs_.begin(), other.xs_.end());
    lams_.insert(lams_.end(), other.lams_.begin(), other.lams_.end());
    modes_.insert(modes_.end(), other.modes_.begin(), other.modes_.end());
    events_.insert(events_.end(), other.events_.begin(), other.events_.end());
  }

 private:
  int n_;
  std::vector<double> ts_;
  std::vector<double> xs_;
  std::vector<double> lams_;
  std::vector<Mode> modes_;
  std::vector<Event> events_;
};

}  // namespace hidyn
