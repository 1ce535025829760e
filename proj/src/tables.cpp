#include "mfg/tables.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/error.hpp"

namespace mfg {

const char* role_name(Role role) { return role == Role::kMajor ? "major" : "minor"; }

int default_time_steps(const ModelSpec& model, int N) {
  const double n = std::ceil(10.0 * model.rate_bound * model.T * N);
  return std::max(100, static_cast<int>(n));
}

MajorPolicy constant_major(std::size_t action) {
  return [action](double, int, StateView) { return action; };
}

MinorPolicy constant_minor(std::size_t action) {
  return [action](double, int, int, StateView) { return action; };
}

FeedbackPolicy::FeedbackPolicy(Role role, TimeGrid time, std::shared_ptr<const SimplexGrid> grid,
                               int M0, ActionSet actions, std::size_t fill)
    : role_(role), time_(time), grid_(std::move(grid)), M0_(M0), actions_(std::move(actions)) {
  if (actions_.empty()) throw Error(Errc::kNoActions, "policy over an empty action set");
  if (fill >= actions_.size()) throw Error(Errc::kBadParameter, "fill action out of range");
  data_.assign(static_cast<std::size_t>(time_.knots()) * slice_size(), static_cast<std::uint16_t>(fill));
}

std::size_t FeedbackPolicy::major_action(double t, int i0, StateView x) const {
  return at(time_.step_at(t) + 1, i0, grid_->nearest(x));
}

std::size_t FeedbackPolicy::minor_action(double t, int i, int i0, StateView x) const {
  return at(time_.step_at(t) + 1, state_index(Role::kMinor, M(), i0, i), grid_->nearest(x));
}

MajorPolicy FeedbackPolicy::major_fn() const {
  return TabulatedMajor{std::make_shared<const FeedbackPolicy>(*this)};
}

MinorPolicy FeedbackPolicy::minor_fn() const {
  return TabulatedMinor{std::make_shared<const FeedbackPolicy>(*this)};
}

std::size_t FeedbackPolicy::count_differences(const FeedbackPolicy& other) const {
  if (other.data_.size() != data_.size()) {
    throw Error(Errc::kBadParameter, "comparing policies of different shapes");
  }
  std::size_t n = 0;
  for (std::size_t k = 0; k < data_.size(); ++k) n += data_[k] != other.data_[k];
  return n;
}

ValueTable::ValueTable(Role role, TimeGrid time, std::shared_ptr<const SimplexGrid> grid, int M0)
    : role_(role), time_(time), grid_(std::move(grid)), M0_(M0) {
  data_.assign(static_cast<std::size_t>(time_.knots()) * slice_size(), 0.0);
}

double ValueTable::value(int knot, int state, StateView x) const {
  auto s = slice(knot).subspan(state * grid_->size(), grid_->size());
  return interpolate(*grid_, s, x);
}

double ValueTable::sup_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace mfg
