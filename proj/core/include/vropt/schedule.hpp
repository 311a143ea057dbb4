#pragma once

#include <optional>
#include <string>

namespace vropt {

// ceil(sqrt(v)) computed exactly for integer v >= 1.
int ceil_sqrt(long long v);

// Extra knobs accepted by the preset factories. A stepsize override is
// honored verbatim and flags the schedule as non-theoretical; a scale factor
// multiplies the theoretical stepsize (scale > 1 also drops the flag).
struct ScheduleExtras {
  std::optional<double> stepsize_override;
  double stepsize_scale = 1.0;
  std::optional<double> g0;       // initial gradient second moment (cor3 family)
  std::optional<double> epsilon;  // target accuracy (cor3 family)
};

// Single-machine schedule: constant stepsize, k = 0 gets its own batch size,
// lambda(0) is pinned to 1, and lambda/batch are constant afterwards.
class ParamSchedule {
 public:
  static ParamSchedule custom(int n, double eta, int b0, int b, double lambda_rest);

  double eta(long k) const { (void)k; return eta_; }
  int batch(long k) const { return k == 0 ? b0_ : b_; }
  double lambda(long k) const { return k == 0 ? 1.0 : lambda_; }

  // M_k = 2/(lambda_k b_k) + 8 lambda_k n^2 / b_k^3 for k >= 1 (constant here).
  double variance_factor() const;
  // Largest admissible constant stepsize, 1/(L (1 + sqrt(M))).
  double stepsize_cap(double smoothness) const;

  int n() const { return n_; }
  int batch0() const { return b0_; }
  int batch_rest() const { return b_; }
  double lambda_rest() const { return lambda_; }
  const std::string& preset() const { return preset_; }
  bool theoretical() const { return theoretical_; }

 private:
  ParamSchedule() = default;
  friend ParamSchedule schedule_preset(const std::string&, int, double, const ScheduleExtras&);

  int n_ = 0;
  double eta_ = 0.0;
  int b0_ = 0;
  int b_ = 0;
  double lambda_ = 0.0;
  std::string preset_ = "custom";
  bool theoretical_ = false;
};

// name is one of cor1 (full first batch), cor2 (sqrt batches throughout), or
// cor3 (first batch sized from g0/epsilon). All use b_k = ceil(sqrt(n)),
// lambda_k = b_k/(2n) and eta = 1/((1 + sqrt(8)) L) unless overridden.
ParamSchedule schedule_preset(const std::string& name, int n, double smoothness,
                              const ScheduleExtras& extras = {});

// Federated schedule: s_k clients per round, b_k samples per sampled client.
class DistSchedule {
 public:
  static DistSchedule custom(int n, int m, double eta, int s0, int b0, int s, int b,
                             double lambda_rest);

  double eta(long k) const { (void)k; return eta_; }
  int clients(long k) const { return k == 0 ? s0_ : s_; }
  int batch(long k) const { return k == 0 ? b0_ : b_; }
  double lambda(long k) const { return k == 0 ? 1.0 : lambda_; }

  // W_k = 2/(lambda s b) + 8 lambda n^2 m^2 / (s^3 b^3) for k >= 1.
  double variance_factor() const;
  double stepsize_cap(double smoothness) const;

  int n() const { return n_; }
  int m() const { return m_; }
  int clients0() const { return s0_; }
  int batch0() const { return b0_; }
  int clients_rest() const { return s_; }
  int batch_rest() const { return b_; }
  double lambda_rest() const { return lambda_; }
  const std::string& preset() const { return preset_; }
  bool theoretical() const { return theoretical_; }

 private:
  DistSchedule() = default;
  friend DistSchedule dist_schedule_preset(const std::string&, int, int, double,
                                           const ScheduleExtras&);

  int n_ = 0, m_ = 0;
  double eta_ = 0.0;
  int s0_ = 0, b0_ = 0, s_ = 0, b_ = 0;
  double lambda_ = 0.0;
  std::string preset_ = "custom";
  bool theoretical_ = false;
};

// name is cor1d (all clients, full local batch at round 0), cor2d (sqrt
// sampling throughout), or cor3d (s0 sized from g0/epsilon, b0 = m). All use
// s_k = ceil(sqrt(n)), b_k = ceil(sqrt(m)), lambda_k = s_k b_k/(2 n m).
DistSchedule dist_schedule_preset(const std::string& name, int n, int m, double smoothness,
                                  const ScheduleExtras& extras = {});

// Epoch-based baseline: full gradient every epoch_length + 1 steps, minibatch
// corrections in between. epoch_length = 0 degenerates to exact-gradient
// descent.
struct SarahParams {
  int epoch_length = 0;
  int batch = 1;
  double eta = 0.0;
};
SarahParams sarah_defaults(int n, double smoothness);

struct DSarahParams {
  int epoch_length = 0;
  int clients = 1;
  int batch = 1;
  double eta = 0.0;
};
DSarahParams dsarah_defaults(int n, int m, double smoothness);

}  // namespace vropt
