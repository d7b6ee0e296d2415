#include "droneroute/instance.hpp"

#include <algorithm>
#include <stdexcept>

namespace droneroute {

void ProblemInstance::rebuild_cache() {
  const int n = net.node_count();
  return_leg.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (net.is_value[i]) {
      const double ta = dist(net.coords[net.end_a[i]], net.coords[depot]);
      const double tb = dist(net.coords[net.end_b[i]], net.coords[depot]);
      return_leg[i] = std::min(ta, tb);
    } else {
      return_leg[i] = dist(net.coords[i], net.coords[depot]);
    }
  }
}

double ProblemInstance::total_value() const {
  double s = 0.0;
  for (double v : net.value) s += v;
  return s;
}

ProblemInstance pack_instance(TransformedNetwork net, int depot, int K, double p_max, double Q,
                              uint64_t seed) {
  ProblemInstance inst;
  inst.net = std::move(net);
  inst.depot = depot;
  inst.K = K;
  inst.p_max = p_max;
  inst.Q = Q;
  inst.seed = seed;
  inst.rebuild_cache();
  validate_instance(inst);
  return inst;
}

void validate_instance(const ProblemInstance& inst) {
  validate_transformed(inst.net);
  if (inst.depot < 0 || inst.depot >= inst.net.original_count)
    throw std::invalid_argument("instance: depot must be an original node");
  if (inst.K < 1) throw std::invalid_argument("instance: need at least one drone");
  if (!(inst.p_max > 0.0)) throw std::invalid_argument("instance: non-positive flight duration cap");
  if (!(inst.Q > 0.0)) throw std::invalid_argument("instance: non-positive battery capacity");
  ProblemInstance fresh = inst;
  fresh.rebuild_cache();
  if (fresh.return_leg != inst.return_leg)
    throw std::invalid_argument("instance: stale return-leg cache");
}

}  // namespace droneroute
