#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mevsim/model.hpp"

namespace mevsim {

/// Full-mesh network with a per-pair latency in ticks. Unlisted pairs use the
/// default latency; latency(a, a) is always 0.
class NetworkTopology {
public:
  NetworkTopology(std::vector<NodeId> nodes, std::uint64_t default_latency,
                  std::map<std::pair<NodeId, NodeId>, std::uint64_t> overrides = {});

  static NetworkTopology uniform(std::size_t node_count, std::uint64_t latency);

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  bool has_node(NodeId n) const noexcept;
  std::uint64_t latency(NodeId from, NodeId to) const;
  std::uint64_t max_latency() const noexcept;

private:
  std::vector<NodeId> nodes_;
  std::uint64_t default_latency_;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> overrides_;
};

struct Delivery {
  NodeId node;
  std::uint64_t tick;
  bool operator==(const Delivery&) const = default;
};

struct QueuedBundle {
  Bundle bundle;
  std::uint64_t submitted_tick;
};

struct PrivateReceipt {
  AgentId builder;
  std::size_t queue_position;
  std::uint64_t tick;
};

struct PbsAccess;

/// Capability for reading private channels. Only block building holds one.
class ChannelKey {
  friend struct PbsAccess;
  ChannelKey() = default;
};

/// Per-node pending pools plus one private bundle channel per builder.
class Mempool {
public:
  explicit Mempool(NetworkTopology topology) : topology_(std::move(topology)) {}

  const NetworkTopology& topology() const noexcept { return topology_; }

  /// Schedules `tx` to become visible at every node n from tick + latency(origin, n).
  std::vector<Delivery> broadcast_tx(const Transaction& tx, NodeId origin, std::uint64_t tick);

  /// Pending transactions visible at `node` by `tick`, in (arrival, id) order.
  std::vector<Transaction> node_view(NodeId node, std::uint64_t tick) const;

  void register_builder(AgentId builder, bool accepts_private_flow);
  PrivateReceipt submit_private_bundle(const Bundle& bundle, AgentId builder, std::uint64_t tick);
  const std::vector<QueuedBundle>& private_channel(AgentId builder, const ChannelKey&) const;

  /// Drops chain-included transactions from every view and every private bundle
  /// that references one of them.
  void remove(const std::set<TxId>& ids);

  /// Removes private bundles older than `min_tick` across all channels.
  void expire_private(std::uint64_t min_tick);

  std::size_t pending_count() const noexcept { return txs_.size(); }
  bool is_pending(TxId id) const noexcept { return txs_.contains(id); }

private:
  NetworkTopology topology_;
  std::map<TxId, Transaction> txs_;
  std::unordered_map<NodeId, std::map<TxId, std::uint64_t>> arrivals_;
  std::map<AgentId, std::vector<QueuedBundle>> channels_;
  std::map<AgentId, bool> accepts_private_;
};

}  // namespace mevsim
