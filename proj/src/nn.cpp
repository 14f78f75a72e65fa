#include "tala/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tala/error.hpp"

TALA_NAMESPACE_BEGIN

static_assert(std::endian::native == std::endian::little,
              "weight blob I/O assumes a little-endian host");

Tensor::Tensor(std::vector<std::size_t> shape, Real fill_value) : dims(std::move(shape)) {
  const std::size_t n =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  data.assign(n, fill_value);
}

void Tensor::fill(Real value) { std::fill(data.begin(), data.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](Real v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------------------
// Layers

Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
  if (x.rank() != 2 || W.rank() != 2 || b.rank() != 1 || x.cols() != W.rows() ||
      W.cols() != b.size()) {
    throw ShapeError("linear: incompatible shapes x" + x.shape_string() + " W" +
                     W.shape_string() + " b" + b.shape_string());
  }
  const std::size_t n = x.rows();
  const std::size_t d_in = W.rows();
  const std::size_t d_out = W.cols();
  Tensor y = Tensor::matrix(n, d_out);
  for (std::size_t i = 0; i < n; ++i) {
    Real* yi = y.row(i);
    std::copy(b.data.begin(), b.data.end(), yi);
    const Real* xi = x.row(i);
    for (std::size_t k = 0; k < d_in; ++k) {
      const Real xik = xi[k];
      if (xik == 0) continue;
      const Real* wk = W.row(k);
      for (std::size_t j = 0; j < d_out; ++j) yi[j] += xik * wk[j];
    }
  }
  return y;
}

Tensor linear_backward(const Tensor& x, const Tensor& W, const Tensor& dy, Tensor& dW, Tensor& db) {
  const std::size_t n = x.rows();
  const std::size_t d_in = W.rows();
  const std::size_t d_out = W.cols();
  if (dy.rows() != n || dy.cols() != d_out || dW.dims != W.dims || db.size() != d_out) {
    throw ShapeError("linear_backward: incompatible shapes x" + x.shape_string() + " dy" +
                     dy.shape_string() + " W" + W.shape_string());
  }
  Tensor dx = Tensor::matrix(n, d_in);
  for (std::size_t i = 0; i < n; ++i) {
    const Real* dyi = dy.row(i);
    const Real* xi = x.row(i);
    Real* dxi = dx.row(i);
    for (std::size_t j = 0; j < d_out; ++j) db.data[j] += dyi[j];
    for (std::size_t k = 0; k < d_in; ++k) {
      const Real* wk = W.row(k);
      Real* dwk = dW.row(k);
      const Real xik = xi[k];
      Real acc = 0;
      for (std::size_t j = 0; j < d_out; ++j) {
        acc += dyi[j] * wk[j];
        dwk[j] += xik * dyi[j];
      }
      dxi[k] = acc;
    }
  }
  return dx;
}

void relu_inplace(Tensor& x) {
  for (Real& v : x.data) v = v > 0 ? v : Real(0);
}

void relu_backward_inplace(const Tensor& output, Tensor& dy) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(output.data[i] > 0)) dy.data[i] = 0;
  }
}

Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  const std::size_t c = logits.cols();
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    Real* row = p.row(i);
    const Real mx = *std::max_element(row, row + c);
    Real sum = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) row[j] /= sum;
  }
  return p;
}

XentResult softmax_xent(const Tensor& logits, std::span<const std::size_t> gold) {
  const std::size_t n = logits.rows();
  const std::size_t c = logits.cols();
  if (gold.size() != n)
    throw ShapeError("softmax_xent: " + std::to_string(gold.size()) + " targets for logits" +
                     logits.shape_string());
  XentResult out;
  out.dlogits = Tensor(logits.dims);
  if (n == 0) return out;
  const double scale = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i] >= c)
      throw ShapeError("softmax_xent: gold index " + std::to_string(gold[i]) + " >= " +
                       std::to_string(c) + " classes");
    const Real* z = logits.row(i);
    Real* d = out.dlogits.row(i);
    const Real mx = *std::max_element(z, z + c);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += std::exp(static_cast<double>(z[j] - mx));
    const double log_sum = std::log(sum);
    total += log_sum - static_cast<double>(z[gold[i]] - mx);
    for (std::size_t j = 0; j < c; ++j) {
      const double p = std::exp(static_cast<double>(z[j] - mx) - log_sum);
      d[j] = static_cast<Real>((p - (j == gold[i] ? 1.0 : 0.0)) * scale);
    }
  }
  out.loss = total * scale;
  return out;
}

std::size_t argmax(const Real* scores, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::size_t masked_argmax(const Real* scores, std::size_t n, std::span<const std::uint8_t> allowed) {
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!allowed[i]) continue;
    if (best == n || scores[i] > scores[best]) best = i;
  }
  if (best == n) throw Error("masked_argmax: no allowed class");
  return best;
}

// ---------------------------------------------------------------------------
// ParamStore

std::size_t ParamStore::add(std::string name, Tensor init) {
  if (find(name)) throw Error("duplicate parameter '" + name + "'");
  Param p;
  p.name = std::move(name);
  p.grad = Tensor(init.dims);
  p.m = Tensor(init.dims);
  p.v = Tensor(init.dims);
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

const Param* ParamStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Param* ParamStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::size_t ParamStore::index(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw Error("unknown parameter '" + std::string(name) + "'");
}

std::size_t ParamStore::num_weights() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    for (Real g : p.grad.data) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

void ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (!(norm > max_norm)) return;
  const Real scale = static_cast<Real>(max_norm / norm);
  for (auto& p : params_) {
    for (Real& g : p.grad.data) g *= scale;
  }
}

std::size_t ParamStore::copy_values_from(const ParamStore& other, std::string_view prefix) {
  std::size_t copied = 0;
  for (auto& p : params_) {
    if (p.name.rfind(prefix, 0) != 0) continue;
    const Param* src = other.find(p.name);
    if (!src) continue;
    if (src->value.dims != p.value.dims)
      throw ShapeError("cannot initialise '" + p.name + "' " + p.value.shape_string() +
                       " from " + src->value.shape_string());
    p.value = src->value;
    ++copied;
  }
  return copied;
}

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  for (const auto& p : store.params()) {
    if (!p.grad.all_finite()) throw TrainingError("non-finite gradient in '" + p.name + "'");
  }
  if (cfg.grad_clip > 0) store.clip_grad_norm(cfg.grad_clip);
  ++store.step;
  const double t = static_cast<double>(store.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  const Real step_size = static_cast<Real>(cfg.lr / bc1);
  const Real inv_sqrt_bc2 = static_cast<Real>(1.0 / std::sqrt(bc2));
  const Real eps = static_cast<Real>(cfg.eps);
  for (auto& p : store.params()) {
    Real* value = p.value.data.data();
    Real* m = p.m.data.data();
    Real* v = p.v.data.data();
    const Real* g = p.grad.data.data();
    const std::size_t n = p.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      value[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_bc2 + eps);
    }
  }
}

void init_uniform(Tensor& t, double limit, Rng& rng) {
  for (Real& v : t.data) v = static_cast<Real>(rng.uniform(-limit, limit));
}

void init_he_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  init_uniform(t, std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1))), rng);
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(const std::function<double(bool)>& loss, ParamStore& store,
                           const GradCheckOptions& options) {
  store.zero_grad();
  loss(true);
  GradCheckResult result;
  const double h = options.step;
  for (auto& p : store.params()) {
    const std::vector<Real> analytic = p.grad.data;
    std::vector<std::size_t> order(p.value.size());
    std::iota(order.begin(), order.end(), 0);
    if (options.max_per_param && order.size() > options.max_per_param) {
      std::stable_partition(order.begin(), order.end(),
                            [&](std::size_t i) { return analytic[i] != 0; });
      order.resize(options.max_per_param);
    }
    for (std::size_t i : order) {
      const Real original = p.value.data[i];
      p.value.data[i] = static_cast<Real>(original + h);
      const double plus = loss(false);
      p.value.data[i] = static_cast<Real>(original - h);
      const double minus = loss(false);
      p.value.data[i] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.scale_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p.name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Weight blobs

namespace {

constexpr char kMagic[4] = {'C', 'L', 'M', 'C'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw ParseError("truncated weight blob");
  return value;
}

}  // namespace

void write_weights(std::ostream& out, const ParamStore& store) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kWeightFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& p : store.params()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.dims) put<std::uint64_t>(out, d);
    for (Real v : p.value.data) put<float>(out, static_cast<float>(v));
  }
}

std::vector<NamedTensor> read_weights(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("not a weight blob (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kWeightFormatVersion)
    throw ParseError("unsupported weight blob version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    NamedTensor nt;
    const auto name_len = get<std::uint32_t>(in);
    nt.name.resize(name_len);
    if (!in.read(nt.name.data(), name_len)) throw ParseError("truncated weight blob");
    const auto rank = get<std::uint32_t>(in);
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    nt.tensor = Tensor(std::move(dims));
    for (Real& v : nt.tensor.data) v = static_cast<Real>(get<float>(in));
    out.push_back(std::move(nt));
  }
  return out;
}

void load_weights(ParamStore& store, const std::vector<NamedTensor>& tensors) {
  for (auto& p : store.params()) {
    const auto it = std::find_if(tensors.begin(), tensors.end(),
                                 [&](const NamedTensor& t) { return t.name == p.name; });
    if (it == tensors.end()) throw ParseError("weight blob lacks tensor '" + p.name + "'");
    if (it->tensor.dims != p.value.dims)
      throw ParseError("tensor '" + p.name + "' has shape " + it->tensor.shape_string() +
                       ", expected " + p.value.shape_string());
    p.value = it->tensor;
  }
}

void save_weights_file(const std::string& path, const ParamStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_weights(out, store);
  if (!out) throw DataError("failed writing '" + path + "'");
}

void load_weights_file(const std::string& path, ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  load_weights(store, read_weights(in));
}

std::uint64_t weights_fingerprint(const ParamStore& store) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : store.params()) {
    mix(p.name.data(), p.name.size());
    mix(p.value.data.data(), p.value.size() * sizeof(Real));
  }
  return h;
}

TALA_NAMESPACE_END
