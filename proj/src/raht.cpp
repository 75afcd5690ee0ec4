#include "mesongs/raht.hpp"

#include <cmath>
#include <string>

#include "mesongs/error.hpp"

namespace mesongs {

RahtCoefficients raht_forward(std::span<const double> values, const MergeSchedule& schedule) {
  if (values.size() != schedule.leaf_count) {
    throw_argument("raht_forward: " + std::to_string(values.size()) + " values for a schedule with " +
                   std::to_string(schedule.leaf_count) + " leaves");
  }
  RahtCoefficients out;
  if (values.empty()) return out;
  out.ac.reserve(values.size() - 1);

  std::vector<double> current(values.begin(), values.end());
  std::vector<double> next;
  for (const MergeStep& step : schedule.steps) {
    if (step.input_count != current.size()) throw_argument("raht_forward: inconsistent merge schedule");
    next.clear();
    std::size_t i = 0;
    for (const MergePair& pair : step.pairs) {
      while (i < pair.left) next.push_back(current[i++]);
      const double sa = std::sqrt(static_cast<double>(pair.left_weight));
      const double sb = std::sqrt(static_cast<double>(pair.right_weight));
      const double norm = std::sqrt(static_cast<double>(pair.left_weight + pair.right_weight));
      const double a = current[i];
      const double b = current[i + 1];
      next.push_back((sa * a + sb * b) / norm);
      out.ac.push_back((-sb * a + sa * b) / norm);
      i += 2;
    }
    while (i < current.size()) next.push_back(current[i++]);
    current.swap(next);
  }
  if (current.size() != 1) throw_argument("raht_forward: schedule does not reduce to a single root");
  out.dc = current.front();
  return out;
}

std::vector<double> raht_inverse(const RahtCoefficients& coeffs, const MergeSchedule& schedule) {
  if (schedule.leaf_count == 0) {
    if (!coeffs.ac.empty()) throw_corrupt("raht_inverse: coefficients for an empty schedule");
    return {};
  }
  if (coeffs.ac.size() != schedule.pair_count() || coeffs.ac.size() != schedule.leaf_count - 1) {
    throw_corrupt("raht_inverse: " + std::to_string(coeffs.ac.size()) + " AC coefficients, expected " +
                  std::to_string(schedule.leaf_count - 1));
  }
  std::vector<double> current{coeffs.dc};
  std::vector<double> prev;
  std::size_t ac_end = coeffs.ac.size();
  for (auto it = schedule.steps.rbegin(); it != schedule.steps.rend(); ++it) {
    const MergeStep& step = *it;
    if (current.size() != step.input_count - step.pairs.size()) {
      throw_corrupt("raht_inverse: inconsistent merge schedule");
    }
    const std::size_t ac_begin = ac_end - step.pairs.size();
    prev.clear();
    prev.reserve(step.input_count);
    std::size_t out_index = 0;  // position in `current`
    for (std::size_t k = 0; k < step.pairs.size(); ++k) {
      const MergePair& pair = step.pairs[k];
      while (prev.size() < pair.left) prev.push_back(current[out_index++]);
      const double sa = std::sqrt(static_cast<double>(pair.left_weight));
      const double sb = std::sqrt(static_cast<double>(pair.right_weight));
      const double norm = std::sqrt(static_cast<double>(pair.left_weight + pair.right_weight));
      const double dc = current[out_index++];
      const double ac = coeffs.ac[ac_begin + k];
      prev.push_back((sa * dc - sb * ac) / norm);
      prev.push_back((sb * dc + sa * ac) / norm);
    }
    while (out_index < current.size()) prev.push_back(current[out_index++]);
    current.swap(prev);
    ac_end = ac_begin;
  }
  if (current.size() != schedule.leaf_count) throw_corrupt("raht_inverse: leaf count mismatch");
  return current;
}

}  // namespace mesongs
