#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "offtrack/autodiff.hpp"
#include "offtrack/rng.hpp"

namespace ot::nn {

using ad::Mat;
using ad::Tape;
using ad::Var;

// Named parameter arrays in registration order. The order defines the flat
// layout used by the optimizer and the checkpoint container. fetch() counts
// reads per entry so tests can assert that evaluation-time code paths never
// touch encoder parameters.
template <typename Scalar>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Mat<Scalar> value;
    mutable long reads = 0;
  };

  int add(const std::string& name, int rows, int cols) {
    OT_REQUIRE(index_.find(name) == index_.end(), ArgumentError,
               "duplicate parameter name " + name);
    Entry e;
    e.name = name;
    e.value = Mat<Scalar>::Zero(rows, cols);
    const int idx = static_cast<int>(entries_.size());
    index_[name] = idx;
    entries_.push_back(std::move(e));
    return idx;
  }

  int count() const { return static_cast<int>(entries_.size()); }
  const Entry& entry(int idx) const { return entries_[idx]; }
  Mat<Scalar>& value(int idx) { return entries_[idx].value; }
  const Mat<Scalar>& value(int idx) const { return entries_[idx].value; }

  int find(const std::string& name) const {
    auto it = index_.find(name);
    OT_REQUIRE(it != index_.end(), ArgumentError, "unknown parameter " + name);
    return it->second;
  }

  // Materialize a parameter as a differentiable leaf on a tape.
  Var fetch(Tape<Scalar>& tape, int idx) const {
    ++entries_[idx].reads;
    return tape.leaf(entries_[idx].value);
  }

  long reads_matching(const std::string& substring) const {
    long total = 0;
    for (const auto& e : entries_)
      if (e.name.find(substring) != std::string::npos) total += e.reads;
    return total;
  }

  void reset_read_counters() const {
    for (const auto& e : entries_) e.reads = 0;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  // Flat views in registration order, column-major within each entry.
  std::vector<double> to_flat() const {
    std::vector<double> out;
    out.reserve(scalar_count());
    for (const auto& e : entries_)
      for (Eigen::Index j = 0; j < e.value.size(); ++j)
        out.push_back(static_cast<double>(e.value(j)));
    return out;
  }

  void from_flat(const std::vector<double>& flat) {
    OT_REQUIRE(flat.size() == scalar_count(), ArgumentError,
               "flat parameter size mismatch");
    std::size_t k = 0;
    for (auto& e : entries_)
      for (Eigen::Index j = 0; j < e.value.size(); ++j)
        e.value(j) = static_cast<Scalar>(flat[k++]);
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Glorot-uniform init for weight matrices; zeros for biases (LSTM forget gate
// bias raised to 1 by the LSTM builder).
template <typename Scalar>
void init_glorot(Mat<Scalar>& w, Rng& rng) {
  const double a = std::sqrt(6.0 / (w.rows() + w.cols()));
  for (Eigen::Index j = 0; j < w.size(); ++j)
    w(j) = static_cast<Scalar>(rng.uniform(-a, a));
}

// in -> hidden -> hidden -> out with internal ReLU, linear output.
template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;

  Mlp(ParamStore<Scalar>& store, const std::string& prefix, int in, int hidden,
      int out)
      : in_(in), hidden_(hidden), out_(out) {
    w_[0] = store.add(prefix + ".w0", in, hidden);
    b_[0] = store.add(prefix + ".b0", 1, hidden);
    w_[1] = store.add(prefix + ".w1", hidden, hidden);
    b_[1] = store.add(prefix + ".b1", 1, hidden);
    w_[2] = store.add(prefix + ".w2", hidden, out);
    b_[2] = store.add(prefix + ".b2", 1, out);
  }

  void init(ParamStore<Scalar>& store, Rng& rng) const {
    for (int l = 0; l < 3; ++l) init_glorot(store.value(w_[l]), rng);
  }

  Var apply(Tape<Scalar>& tape, const ParamStore<Scalar>& store, Var x) const {
    Var h = tape.relu(tape.affine(x, store.fetch(tape, w_[0]), store.fetch(tape, b_[0])));
    h = tape.relu(tape.affine(h, store.fetch(tape, w_[1]), store.fetch(tape, b_[1])));
    return tape.affine(h, store.fetch(tape, w_[2]), store.fetch(tape, b_[2]));
  }

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  int in_ = 0, hidden_ = 0, out_ = 0;
  int w_[3] = {-1, -1, -1};
  int b_[3] = {-1, -1, -1};
};

// Stacked LSTM, shared across agents by construction (rows of the input are
// independent agents). Gate layout [i f g o].
template <typename Scalar>
class LstmStack {
 public:
  struct State {
    std::vector<Var> h;  // per layer
    std::vector<Var> c;
  };

  LstmStack() = default;

  LstmStack(ParamStore<Scalar>& store, const std::string& prefix, int input,
            int hidden, int layers)
      : input_(input), hidden_(hidden), layers_(layers) {
    for (int l = 0; l < layers; ++l) {
      const int in = l == 0 ? input : hidden;
      w_.push_back(store.add(prefix + ".l" + std::to_string(l) + ".w", in + hidden,
                             4 * hidden));
      b_.push_back(store.add(prefix + ".l" + std::to_string(l) + ".b", 1, 4 * hidden));
    }
  }

  void init(ParamStore<Scalar>& store, Rng& rng) const {
    for (int l = 0; l < layers_; ++l) {
      init_glorot(store.value(w_[l]), rng);
      // Forget-gate bias starts at 1.
      auto& bias = store.value(b_[l]);
      for (int j = hidden_; j < 2 * hidden_; ++j) bias(0, j) = Scalar(1);
    }
  }

  State zero_state(Tape<Scalar>& tape, int rows) const {
    State s;
    for (int l = 0; l < layers_; ++l) {
      s.h.push_back(tape.zeros(rows, hidden_));
      s.c.push_back(tape.zeros(rows, hidden_));
    }
    return s;
  }

  // One step; returns the top-layer hidden output.
  Var step(Tape<Scalar>& tape, const ParamStore<Scalar>& store, Var x,
           State& state) const {
    Var layer_in = x;
    for (int l = 0; l < layers_; ++l) {
      const Var zin = tape.concat_cols(layer_in, state.h[l]);
      const Var gates =
          tape.affine(zin, store.fetch(tape, w_[l]), store.fetch(tape, b_[l]));
      const Var i = tape.sigmoid(tape.slice_cols(gates, 0, hidden_));
      const Var f = tape.sigmoid(tape.slice_cols(gates, hidden_, hidden_));
      const Var g = tape.tanh_(tape.slice_cols(gates, 2 * hidden_, hidden_));
      const Var o = tape.sigmoid(tape.slice_cols(gates, 3 * hidden_, hidden_));
      const Var c = tape.add(tape.cmul(f, state.c[l]), tape.cmul(i, g));
      const Var h = tape.cmul(o, tape.tanh_(c));
      state.c[l] = c;
      state.h[l] = h;
      layer_in = h;
    }
    return layer_in;
  }

  int hidden_dim() const { return hidden_; }
  int layer_count() const { return layers_; }

 private:
  int input_ = 0, hidden_ = 0, layers_ = 0;
  std::vector<int> w_, b_;
};

}  // namespace ot::nn
