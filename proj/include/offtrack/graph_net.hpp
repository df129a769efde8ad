#pragma once

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "offtrack/nn.hpp"

namespace ot::gn {

using ad::Mat;
using ad::RowIndices;
using ad::Tape;
using ad::Var;
using nn::Mlp;
using nn::ParamStore;

// Directed edge set: all ordered pairs (i, j) with i != j and j not
// sender-only. Sender-only nodes broadcast their features but never receive.
struct GraphTopology {
  int n_nodes = 0;
  std::vector<int> sender_only;  // sorted ascending

  bool is_sender_only(int i) const {
    return std::binary_search(sender_only.begin(), sender_only.end(), i);
  }

  std::vector<int> receivers() const {
    std::vector<int> out;
    out.reserve(n_nodes);
    for (int i = 0; i < n_nodes; ++i)
      if (!is_sender_only(i)) out.push_back(i);
    return out;
  }

  // (sender, receiver) pairs ordered by receiver then sender; the fixed order
  // makes the sum aggregation deterministic.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int j = 0; j < n_nodes; ++j) {
      if (is_sender_only(j)) continue;
      for (int i = 0; i < n_nodes; ++i)
        if (i != j) out.emplace_back(i, j);
    }
    return out;
  }
};

// Precomputed batched gather/scatter indices for applying one topology to a
// block of windows stacked along the row dimension.
struct BatchedTopology {
  int batch = 0;
  int n_nodes = 0;
  int n_receivers = 0;
  RowIndices senders;        // rows into (batch*n_nodes) node matrix
  RowIndices receivers;      // rows into (batch*n_nodes) node matrix
  RowIndices message_slots;  // rows into (batch*n_receivers) aggregate matrix

  static BatchedTopology build(const GraphTopology& topo, int batch) {
    BatchedTopology bt;
    bt.batch = batch;
    bt.n_nodes = topo.n_nodes;
    const auto edge_list = topo.edges();
    const auto recv = topo.receivers();
    bt.n_receivers = static_cast<int>(recv.size());
    std::vector<int> recv_slot(topo.n_nodes, -1);
    for (int r = 0; r < bt.n_receivers; ++r) recv_slot[recv[r]] = r;

    auto senders = std::make_shared<std::vector<int>>();
    auto receivers = std::make_shared<std::vector<int>>();
    auto slots = std::make_shared<std::vector<int>>();
    senders->reserve(edge_list.size() * batch);
    receivers->reserve(edge_list.size() * batch);
    slots->reserve(edge_list.size() * batch);
    for (int w = 0; w < batch; ++w) {
      const int node_base = w * topo.n_nodes;
      const int slot_base = w * bt.n_receivers;
      for (const auto& [i, j] : edge_list) {
        senders->push_back(node_base + i);
        receivers->push_back(node_base + j);
        slots->push_back(slot_base + recv_slot[j]);
      }
    }
    bt.senders = senders;
    bt.receivers = receivers;
    bt.message_slots = slots;
    return bt;
  }
};

// One round of message passing: per-edge MLP on sender||receiver features,
// sum aggregation into each receiver, per-node MLP on the aggregate.
template <typename Scalar>
class GraphNet {
 public:
  GraphNet() = default;

  GraphNet(ParamStore<Scalar>& store, const std::string& prefix, int node_feat,
           int mlp_hidden, int edge_dim, int out_dim)
      : node_feat_(node_feat),
        edge_dim_(edge_dim),
        out_dim_(out_dim),
        edge_mlp_(store, prefix + ".edge", 2 * node_feat, mlp_hidden, edge_dim),
        node_mlp_(store, prefix + ".node", edge_dim, mlp_hidden, out_dim) {}

  void init(ParamStore<Scalar>& store, Rng& rng) const {
    edge_mlp_.init(store, rng);
    node_mlp_.init(store, rng);
  }

  // node_features: (batch * n_nodes) x node_feat, window-major rows.
  // Returns (batch * n_receivers) x out_dim.
  Var apply(Tape<Scalar>& tape, const ParamStore<Scalar>& store,
            const BatchedTopology& bt, Var node_features) const {
    OT_REQUIRE(node_features.cols == node_feat_, ArgumentError,
               "graph net node feature width mismatch");
    OT_REQUIRE(node_features.rows == bt.batch * bt.n_nodes, ArgumentError,
               "graph net node count mismatch");
    const int slots = bt.batch * bt.n_receivers;
    Var aggregate;
    if (bt.senders->empty()) {
      // No edges: every receiver aggregates the empty sum.
      aggregate = tape.zeros(slots, edge_dim_);
    } else {
      const Var edge_in =
          tape.concat_cols(tape.gather_rows(node_features, bt.senders),
                           tape.gather_rows(node_features, bt.receivers));
      const Var messages = edge_mlp_.apply(tape, store, edge_in);
      aggregate = tape.scatter_sum_rows(messages, bt.message_slots, slots);
    }
    return node_mlp_.apply(tape, store, aggregate);
  }

  int node_feat_dim() const { return node_feat_; }
  int out_dim() const { return out_dim_; }

 private:
  int node_feat_ = 0, edge_dim_ = 0, out_dim_ = 0;
  Mlp<Scalar> edge_mlp_;
  Mlp<Scalar> node_mlp_;
};

// Plain-matrix convenience wrapper: one window, untracked tape.
template <typename Scalar>
Mat<Scalar> gn_apply(const GraphNet<Scalar>& net, const ParamStore<Scalar>& store,
                     const GraphTopology& topo, const Mat<Scalar>& node_features) {
  OT_REQUIRE(node_features.allFinite(), NumericError,
             "gn_apply: non-finite node features");
  OT_REQUIRE(static_cast<int>(node_features.rows()) == topo.n_nodes, ArgumentError,
             "gn_apply: node count mismatch");
  Tape<Scalar> tape;
  const Var x = tape.constant(node_features);
  const Var y = net.apply(tape, store, BatchedTopology::build(topo, 1), x);
  return tape.value(y);
}

}  // namespace ot::gn
