#include "cyclic_swarm/linear_sim.hpp"

#include <stdexcept>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/kernels.hpp"
#include "cyclic_swarm/run_driver.hpp"

namespace cyclic_swarm {

std::vector<Vec2> linear_rhs(const SwarmState& state, Vec2 u_c, const LeaderSet& leaders) {
  if (state.active_count() != state.size())
    throw std::invalid_argument("linear_rhs: linear model has no merged agents");
  if (leaders.size() != state.size()) throw std::invalid_argument("linear_rhs: length mismatch");
  std::vector<Vec2> out(state.size());
  kernels::omp::linear_rhs(state.positions, leaders.raw(), u_c, out);
  return out;
}

LinearEngine::LinearEngine(SwarmState state) : state_(std::move(state)) {
  const std::size_t n = state_.size();
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
}

void LinearEngine::enter_interval(const ControlInterval& iv) {
  interval_ = iv;
  state_.detect = iv.leaders;
}

void LinearEngine::step_to(double t_next) {
  const double h = t_next - state_.t;
  const auto& b = interval_.leaders.raw();
  const Vec2 u = interval_.u_c;
  auto& p = state_.positions;
  const std::size_t n = p.size();

  kernels::omp::linear_rhs(p, b, u, k1_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = p[i] + (0.5 * h) * k1_[i];
  kernels::omp::linear_rhs(tmp_, b, u, k2_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = p[i] + (0.5 * h) * k2_[i];
  kernels::omp::linear_rhs(tmp_, b, u, k3_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = p[i] + h * k3_[i];
  kernels::omp::linear_rhs(tmp_, b, u, k4_);
  const double w = h / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    p[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  state_.t = t_next;
}

TrajectoryRecord LinearEngine::record() const {
  TrajectoryRecord r;
  r.t = state_.t;
  r.positions = state_.positions;
  r.velocities.resize(state_.size());
  kernels::omp::linear_rhs(state_.positions, interval_.leaders.raw(), interval_.u_c, r.velocities);
  r.u_c = interval_.u_c;
  r.n_l = interval_.leaders.count();
  return r;
}

std::vector<TrajectoryRecord> simulate_linear(const ScenarioConfig& config) {
  config.validate();
  if (config.model != Model::Linear) throw ConfigError("simulate_linear needs a linear scenario");
  LinearEngine engine(sample_initial_state(config));
  std::vector<TrajectoryRecord> out;
  drive_schedule(engine, config, [&](const LinearEngine& e) { out.push_back(e.record()); });
  return out;
}

}  // namespace cyclic_swarm
