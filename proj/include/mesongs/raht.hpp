#pragma once

#include <span>
#include <vector>

#include "mesongs/octree.hpp"

namespace mesongs {

// Transform of one attribute channel: the root DC plus one AC coefficient per
// scheduled merge, in schedule order.
struct RahtCoefficients {
  double dc = 0.0;
  std::vector<double> ac;
};

// Each merge of (a, b) with weights (wa, wb) applies
//   dc = ( sqrt(wa) a + sqrt(wb) b) / sqrt(wa + wb)
//   ac = (-sqrt(wb) a + sqrt(wa) b) / sqrt(wa + wb)
// and the merged node carries wa + wb. Unpaired nodes pass through.
RahtCoefficients raht_forward(std::span<const double> values, const MergeSchedule& schedule);

// Exact inverse (every step is an orthonormal rotation). Throws CorruptStream
// if the AC count does not match the schedule.
std::vector<double> raht_inverse(const RahtCoefficients& coeffs, const MergeSchedule& schedule);

}  // namespace mesongs
