#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tala/common.hpp"
#include "tala/random.hpp"

TALA_NAMESPACE_BEGIN

/// Dense row-major tensor. Only rank 1 and 2 are used by the models, but the
/// blob format and shape checks accept any rank.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, Real fill = 0);

  static Tensor matrix(std::size_t rows, std::size_t cols, Real fill = 0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor vector(std::size_t n, Real fill = 0) { return Tensor({n}, fill); }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return dims.size(); }
  std::size_t rows() const noexcept { return dims.empty() ? 0 : dims[0]; }
  std::size_t cols() const noexcept { return dims.empty() ? 0 : (dims[0] ? data.size() / dims[0] : 0); }

  Real* row(std::size_t i) noexcept { return data.data() + i * cols(); }
  const Real* row(std::size_t i) const noexcept { return data.data() + i * cols(); }
  Real& operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols() + j]; }
  Real operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols() + j]; }

  void fill(Real value);
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// ---------------------------------------------------------------------------
// Layers. Forward functions return fresh tensors; backward functions
// accumulate (+=) into the parameter gradients and return the input gradient.

// y = xW + b with x: n×d_in, W: d_in×d_out, b: d_out.
Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b);
Tensor linear_backward(const Tensor& x, const Tensor& W, const Tensor& dy, Tensor& dW, Tensor& db);

void relu_inplace(Tensor& x);
// Zeroes dy wherever the forward output was not positive.
void relu_backward_inplace(const Tensor& output, Tensor& dy);

Tensor softmax(const Tensor& logits);

struct XentResult {
  double loss = 0.0;
  Tensor dlogits;
};

// Mean over rows of -log softmax(logits)[gold]; dlogits = (softmax - onehot)/n.
XentResult softmax_xent(const Tensor& logits, std::span<const std::size_t> gold);

// Greedy choice among allowed classes; ties go to the lowest index.
std::size_t masked_argmax(const Real* scores, std::size_t n, std::span<const std::uint8_t> allowed);
std::size_t argmax(const Real* scores, std::size_t n);

// ---------------------------------------------------------------------------
// Parameters and optimisation

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // Adam first moment
  Tensor v;  // Adam second moment
};

class ParamStore {
 public:
  std::size_t add(std::string name, Tensor init);
  std::size_t index(std::string_view name) const;  // throws if absent
  const Param* find(std::string_view name) const;
  Param* find(std::string_view name);

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Tensor& value(std::size_t i) { return params_[i].value; }
  const Tensor& value(std::size_t i) const { return params_[i].value; }
  Tensor& grad(std::size_t i) { return params_[i].grad; }

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t num_weights() const noexcept;
  std::vector<Param>& params() noexcept { return params_; }
  const std::vector<Param>& params() const noexcept { return params_; }

  void zero_grad();
  double grad_norm() const;
  // Rescales all gradients so their global L2 norm is at most max_norm.
  void clip_grad_norm(double max_norm);

  // Copies values of every parameter whose name starts with `prefix` from
  // `other`; shapes must agree. Returns the number of tensors copied.
  std::size_t copy_values_from(const ParamStore& other, std::string_view prefix);

  std::uint64_t step = 0;

 private:
  std::vector<Param> params_;
};

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 10.0;  // <= 0 disables clipping
};

// Bias-corrected Adam on every parameter using its accumulated gradient.
// Throws TrainingError on a non-finite gradient before touching any value.
void adam_step(ParamStore& store, const AdamConfig& config);

void init_uniform(Tensor& t, double limit, Rng& rng);
// U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)).
void init_he_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

struct GradCheckOptions {
  double step = 1e-6;
  // Denominator floor for the relative error |a - n| / max(|a|, |n|, floor).
  double scale_floor = 1e-6;
  // Elements checked per parameter; 0 checks all of them. When capped, the
  // elements with non-zero analytic gradient come first.
  std::size_t max_per_param = 0;
};

// `loss(true)` evaluates and accumulates analytic gradients into `store`
// (zeroed beforehand); `loss(false)` only evaluates.
GradCheckResult grad_check(const std::function<double(bool)>& loss, ParamStore& store,
                           const GradCheckOptions& options = {});

// ---------------------------------------------------------------------------
// Weight blobs: "CLMC", u32 version, u32 tensor count, then per tensor
// u32 name length, name bytes, u32 rank, u64 dims, f32 payload. Little endian.

inline constexpr std::uint32_t kWeightFormatVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

void write_weights(std::ostream& out, const ParamStore& store);
std::vector<NamedTensor> read_weights(std::istream& in);
// Overwrites values of `store` from a blob; every parameter must be present
// with the same shape.
void load_weights(ParamStore& store, const std::vector<NamedTensor>& tensors);

void save_weights_file(const std::string& path, const ParamStore& store);
void load_weights_file(const std::string& path, ParamStore& store);

// FNV-1a over all parameter names and values; used to detect mutation.
std::uint64_t weights_fingerprint(const ParamStore& store);

TALA_NAMESPACE_END
