#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace adpo {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { relu };

// Feedforward score network: an input projection, `num_layers` hidden blocks
// of the same width, and a scalar output head. All layers carry biases.
// Paper scales: small (64, 2), medium (128, 3), large (256, 4).
struct ScorerConfig {
  int input_dim = 16;
  int hidden_dim = 128;
  int num_layers = 3;
  Activation activation = Activation::relu;

  static ScorerConfig small(int input_dim = 16) { return {input_dim, 64, 2}; }
  static ScorerConfig medium(int input_dim = 16) { return {input_dim, 128, 3}; }
  static ScorerConfig large(int input_dim = 16) { return {input_dim, 256, 4}; }

  // hidden_dim in {64,128,256} and num_layers in {2,3,4}
  bool standard_scale() const;

  // (out, in) shapes of all weight matrices, input projection first.
  std::vector<std::pair<int, int>> layer_shapes() const;
  std::size_t param_count() const;

  bool operator==(const ScorerConfig&) const = default;
};

// Scratch buffers for batched forward/backward. One per thread/run.
struct ScorerWorkspace {
  std::vector<RowMat> activations;  // post-ReLU layer outputs, batch rows
  RowMat input;                     // batch copy of inputs
  RowMat delta, delta_next;         // backprop buffers
};

class Scorer {
 public:
  explicit Scorer(const ScorerConfig& config);  // zero-initialized parameters

  const ScorerConfig& config() const { return config_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  // Scores `n` input rows (row-major, n x input_dim) into `out`.
  // Also leaves activations in `ws` for a subsequent backward().
  void forward(std::span<const double> inputs, std::size_t n,
               std::span<double> out, ScorerWorkspace& ws) const;
  std::vector<double> forward(std::span<const double> inputs, std::size_t n) const;
  double forward_one(std::span<const double> input) const;

  // Chain rule from per-row score gradients to the flat parameter gradient,
  // summed over the batch and accumulated into `grad` (caller zeroes it).
  // Requires `ws` from a matching forward() call.
  void backward(std::span<const double> upstream, std::span<double> grad,
                ScorerWorkspace& ws) const;
  std::vector<double> backward(std::span<const double> inputs, std::size_t n,
                               std::span<const double> upstream) const;

  void save_parameters(std::ostream& os) const;  // text dump, exact round-trip

  friend bool operator==(const Scorer& a, const Scorer& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  ScorerConfig config_;
  std::vector<double> params_;
};

// Kaiming-style uniform fan-in init for the weights, zero biases.
// Same (config, seed) always yields identical parameters.
Scorer init_scorer(const ScorerConfig& config, std::uint64_t seed);

Scorer load_scorer(std::istream& is);

struct AdamWState {
  long step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-4;
  double eps = 1e-8;

  static AdamWState make(const ScorerConfig& config, double lr = 5e-4,
                         double weight_decay = 1e-4, double beta1 = 0.9,
                         double beta2 = 0.999);
};

// Decoupled-decay AdamW with bias correction. Biases are exempt from decay.
void adamw_step(Scorer& scorer, AdamWState& state, std::span<const double> grad);

}  // namespace adpo
