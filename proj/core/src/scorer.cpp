#include "adpo/scorer.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "adpo/rng.hpp"

namespace adpo {

namespace {

using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;

void check_config(const ScorerConfig& c) {
  if (c.input_dim <= 0 || c.hidden_dim <= 0 || c.num_layers <= 0) {
    throw std::invalid_argument("scorer: config dimensions must be positive");
  }
}

}  // namespace

bool ScorerConfig::standard_scale() const {
  const bool h = hidden_dim == 64 || hidden_dim == 128 || hidden_dim == 256;
  const bool l = num_layers >= 2 && num_layers <= 4;
  return h && l;
}

std::vector<std::pair<int, int>> ScorerConfig::layer_shapes() const {
  std::vector<std::pair<int, int>> shapes;
  shapes.reserve(static_cast<std::size_t>(num_layers) + 2);
  shapes.emplace_back(hidden_dim, input_dim);
  for (int i = 0; i < num_layers; ++i) shapes.emplace_back(hidden_dim, hidden_dim);
  shapes.emplace_back(1, hidden_dim);
  return shapes;
}

std::size_t ScorerConfig::param_count() const {
  std::size_t n = 0;
  for (auto [out, in] : layer_shapes()) {
    n += static_cast<std::size_t>(out) * in + out;
  }
  return n;
}

Scorer::Scorer(const ScorerConfig& config) : config_(config) {
  check_config(config);
  params_.assign(config.param_count(), 0.0);
}

void Scorer::forward(std::span<const double> inputs, std::size_t n,
                     std::span<double> out, ScorerWorkspace& ws) const {
  const int in_dim = config_.input_dim;
  if (inputs.size() != n * static_cast<std::size_t>(in_dim)) {
    throw std::invalid_argument("scorer: input size does not match n x input_dim");
  }
  if (out.size() != n) {
    throw std::invalid_argument("scorer: output span size mismatch");
  }
  const auto shapes = config_.layer_shapes();
  const std::size_t num_hidden = shapes.size() - 1;  // all but the output head
  ws.activations.resize(num_hidden);
  ws.input = ConstMapMat(inputs.data(), static_cast<Eigen::Index>(n), in_dim);

  const double* p = params_.data();

  const RowMat* prev = nullptr;
  for (std::size_t l = 0; l < num_hidden; ++l) {
    const auto [odim, idim] = shapes[l];
    ConstMapMat w(p, odim, idim);
    ConstMapVec b(p + static_cast<std::size_t>(odim) * idim, odim);
    p += static_cast<std::size_t>(odim) * idim + odim;
    RowMat& act = ws.activations[l];
    if (l == 0) {
      act.noalias() = ws.input * w.transpose();
    } else {
      act.noalias() = (*prev) * w.transpose();
    }
    act.rowwise() += b.transpose();
    act = act.cwiseMax(0.0);
    prev = &act;
  }
  const auto [odim, idim] = shapes.back();
  ConstMapMat w(p, odim, idim);
  const double b = p[static_cast<std::size_t>(odim) * idim];
  MapVec scores(out.data(), static_cast<Eigen::Index>(n));
  scores.noalias() = (*prev) * w.transpose().col(0);
  scores.array() += b;
}

std::vector<double> Scorer::forward(std::span<const double> inputs,
                                    std::size_t n) const {
  std::vector<double> out(n);
  ScorerWorkspace ws;
  forward(inputs, n, out, ws);
  return out;
}

double Scorer::forward_one(std::span<const double> input) const {
  double s = 0.0;
  ScorerWorkspace ws;
  forward(input, 1, {&s, 1}, ws);
  return s;
}

void Scorer::backward(std::span<const double> upstream, std::span<double> grad,
                      ScorerWorkspace& ws) const {
  const std::size_t n = ws.activations.empty()
                            ? 0
                            : static_cast<std::size_t>(ws.activations[0].rows());
  if (upstream.size() != n || n == 0) {
    throw std::invalid_argument("scorer: upstream gradient count must equal batch size");
  }
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("scorer: gradient span size mismatch");
  }
  for (double u : upstream) {
    if (!std::isfinite(u)) {
      throw std::domain_error("scorer: non-finite upstream gradient");
    }
  }

  const auto shapes = config_.layer_shapes();
  const std::size_t num_hidden = shapes.size() - 1;

  // Parameter offsets per layer.
  std::vector<std::size_t> offsets(shapes.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(shapes[l].first) * shapes[l].second + shapes[l].first;
  }

  ConstMapVec u(upstream.data(), static_cast<Eigen::Index>(n));

  // Output head.
  {
    const auto [odim, idim] = shapes.back();
    const std::size_t o = offsets.back();
    const RowMat& a = ws.activations[num_hidden - 1];
    MapVec gw(grad.data() + o, idim);
    gw.noalias() += a.transpose() * u;
    grad[o + static_cast<std::size_t>(odim) * idim] += u.sum();
    ConstMapMat w(params_.data() + o, odim, idim);
    ws.delta.resize(static_cast<Eigen::Index>(n), idim);
    ws.delta.noalias() = u * w;  // n x hidden
  }

  // Hidden blocks, last to first.
  for (std::size_t l = num_hidden; l-- > 0;) {
    const auto [odim, idim] = shapes[l];
    const std::size_t o = offsets[l];
    const RowMat& act = ws.activations[l];
    // ReLU mask: activation is max(z, 0), so act > 0 marks the pass-through set.
    ws.delta = (act.array() > 0.0).select(ws.delta, 0.0);

    MapMat gw(grad.data() + o, odim, idim);
    MapVec gb(grad.data() + o + static_cast<std::size_t>(odim) * idim, odim);
    if (l == 0) {
      gw.noalias() += ws.delta.transpose() * ws.input;
    } else {
      gw.noalias() += ws.delta.transpose() * ws.activations[l - 1];
    }
    gb.noalias() += ws.delta.colwise().sum().transpose();

    if (l > 0) {
      ConstMapMat w(params_.data() + o, odim, idim);
      ws.delta_next.resize(static_cast<Eigen::Index>(n), idim);
      ws.delta_next.noalias() = ws.delta * w;
      ws.delta.swap(ws.delta_next);
    }
  }
}

std::vector<double> Scorer::backward(std::span<const double> inputs, std::size_t n,
                                     std::span<const double> upstream) const {
  ScorerWorkspace ws;
  std::vector<double> scores(n);
  forward(inputs, n, scores, ws);
  std::vector<double> grad(params_.size(), 0.0);
  backward(upstream, grad, ws);
  return grad;
}

void Scorer::save_parameters(std::ostream& os) const {
  os << config_.input_dim << ' ' << config_.hidden_dim << ' '
     << config_.num_layers << '\n';
  os.precision(17);
  for (double v : params_) os << v << '\n';
}

Scorer load_scorer(std::istream& is) {
  ScorerConfig cfg;
  if (!(is >> cfg.input_dim >> cfg.hidden_dim >> cfg.num_layers)) {
    throw std::runtime_error("scorer: malformed parameter dump header");
  }
  Scorer s(cfg);
  for (double& v : s.parameters()) {
    if (!(is >> v)) throw std::runtime_error("scorer: truncated parameter dump");
  }
  return s;
}

Scorer init_scorer(const ScorerConfig& config, std::uint64_t seed) {
  Scorer s(config);
  RngStream rng(seed);
  auto params = s.parameters();
  std::size_t off = 0;
  for (auto [out, in] : config.layer_shapes()) {
    const double bound = std::sqrt(6.0 / in);
    const std::size_t wcount = static_cast<std::size_t>(out) * in;
    for (std::size_t k = 0; k < wcount; ++k) {
      params[off + k] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    off += wcount + out;  // biases stay zero
  }
  return s;
}

AdamWState AdamWState::make(const ScorerConfig& config, double lr,
                            double weight_decay, double beta1, double beta2) {
  AdamWState st;
  st.lr = lr;
  st.weight_decay = weight_decay;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.first_moment.assign(config.param_count(), 0.0);
  st.second_moment.assign(config.param_count(), 0.0);
  return st;
}

void adamw_step(Scorer& scorer, AdamWState& state, std::span<const double> grad) {
  auto params = scorer.parameters();
  if (grad.size() != params.size()) {
    throw std::invalid_argument("adamw: gradient length must equal parameter length");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw std::domain_error("adamw: non-finite gradient entry");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  ConstMapVec g(grad.data(), static_cast<Eigen::Index>(grad.size()));
  MapVec p(params.data(), static_cast<Eigen::Index>(params.size()));
  MapVec m(state.first_moment.data(), static_cast<Eigen::Index>(grad.size()));
  MapVec v(state.second_moment.data(), static_cast<Eigen::Index>(grad.size()));

  m = state.beta1 * m + (1.0 - state.beta1) * g;
  v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);

  // Decoupled weight decay on weight blocks only.
  if (state.weight_decay != 0.0) {
    std::size_t off = 0;
    for (auto [out, in] : scorer.config().layer_shapes()) {
      const std::size_t wcount = static_cast<std::size_t>(out) * in;
      p.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(wcount)) *=
          1.0 - state.lr * state.weight_decay;
      off += wcount + out;
    }
  }
  p.array() -= state.lr * (m.array() / bc1) /
               ((v.array() / bc2).sqrt() + state.eps);
}

}  // namespace adpo
