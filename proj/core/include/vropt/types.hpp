#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace vropt {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Gradient evaluation bookkeeping. paper_count follows the b_k-per-step
// convention used in complexity statements; actual_count counts component
// gradient evaluations the code really performed.
struct GradCounter {
  long long paper_count = 0;
  long long actual_count = 0;
  long long full_batch_events = 0;

  GradCounter& operator+=(const GradCounter& o) {
    paper_count += o.paper_count;
    actual_count += o.actual_count;
    full_batch_events += o.full_batch_events;
    return *this;
  }
};

}  // namespace vropt
