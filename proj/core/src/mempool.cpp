#include "mevsim/mempool.hpp"

#include <algorithm>
#include <string>

namespace mevsim {

NetworkTopology::NetworkTopology(std::vector<NodeId> nodes, std::uint64_t default_latency,
                                 std::map<std::pair<NodeId, NodeId>, std::uint64_t> overrides)
    : nodes_(std::move(nodes)), default_latency_(default_latency), overrides_(std::move(overrides)) {
  if (nodes_.empty()) throw SimError(ErrorCode::InvalidArgument, "topology without nodes");
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end())
    throw SimError(ErrorCode::InvalidArgument, "duplicate node id");
  for (const auto& [pair, lat] : overrides_) {
    if (!has_node(pair.first) || !has_node(pair.second))
      throw SimError(ErrorCode::UnknownNode, "latency override for unknown node");
  }
}

NetworkTopology NetworkTopology::uniform(std::size_t node_count, std::uint64_t latency) {
  std::vector<NodeId> nodes;
  for (std::size_t i = 0; i < node_count; ++i) nodes.emplace_back(static_cast<std::uint32_t>(i));
  return NetworkTopology(std::move(nodes), latency);
}

bool NetworkTopology::has_node(NodeId n) const noexcept { return std::binary_search(nodes_.begin(), nodes_.end(), n); }

std::uint64_t NetworkTopology::latency(NodeId from, NodeId to) const {
  if (!has_node(from)) throw SimError(ErrorCode::UnknownNode, "node " + std::to_string(from.value));
  if (!has_node(to)) throw SimError(ErrorCode::UnknownNode, "node " + std::to_string(to.value));
  if (from == to) return 0;
  auto it = overrides_.find({from, to});
  return it == overrides_.end() ? default_latency_ : it->second;
}

std::uint64_t NetworkTopology::max_latency() const noexcept {
  std::uint64_t m = nodes_.size() > 1 ? default_latency_ : 0;
  for (const auto& [pair, lat] : overrides_)
    if (pair.first != pair.second) m = std::max(m, lat);
  return m;
}

std::vector<Delivery> Mempool::broadcast_tx(const Transaction& tx, NodeId origin, std::uint64_t tick) {
  if (!topology_.has_node(origin)) throw SimError(ErrorCode::UnknownNode, "node " + std::to_string(origin.value));
  std::vector<Delivery> schedule;
  schedule.reserve(topology_.nodes().size());
  for (NodeId n : topology_.nodes()) {
    const std::uint64_t at = tick + topology_.latency(origin, n);
    auto& slot = arrivals_[n];
    auto [it, fresh] = slot.emplace(tx.id(), at);
    if (!fresh) it->second = std::min(it->second, at);
    schedule.push_back(Delivery{n, it->second});
  }
  txs_.emplace(tx.id(), tx);
  return schedule;
}

std::vector<Transaction> Mempool::node_view(NodeId node, std::uint64_t tick) const {
  if (!topology_.has_node(node)) throw SimError(ErrorCode::UnknownNode, "node " + std::to_string(node.value));
  std::vector<std::pair<std::uint64_t, TxId>> visible;
  if (auto it = arrivals_.find(node); it != arrivals_.end()) {
    for (const auto& [id, at] : it->second)
      if (at <= tick && txs_.contains(id)) visible.emplace_back(at, id);
  }
  std::sort(visible.begin(), visible.end());
  std::vector<Transaction> view;
  view.reserve(visible.size());
  for (const auto& [at, id] : visible) view.push_back(txs_.at(id));
  return view;
}

void Mempool::register_builder(AgentId builder, bool accepts_private_flow) {
  accepts_private_[builder] = accepts_private_flow;
  channels_[builder];
}

PrivateReceipt Mempool::submit_private_bundle(const Bundle& bundle, AgentId builder, std::uint64_t tick) {
  auto it = accepts_private_.find(builder);
  if (it == accepts_private_.end() || !it->second)
    throw SimError(ErrorCode::BuilderRejectsPrivateFlow, "builder " + std::to_string(builder.value));
  auto& queue = channels_[builder];
  queue.push_back(QueuedBundle{bundle, tick});
  return PrivateReceipt{builder, queue.size() - 1, tick};
}

const std::vector<QueuedBundle>& Mempool::private_channel(AgentId builder, const ChannelKey&) const {
  static const std::vector<QueuedBundle> kEmpty;
  auto it = channels_.find(builder);
  return it == channels_.end() ? kEmpty : it->second;
}

void Mempool::remove(const std::set<TxId>& ids) {
  if (ids.empty()) return;
  for (TxId id : ids) txs_.erase(id);
  for (auto& [node, slot] : arrivals_)
    for (TxId id : ids) slot.erase(id);
  for (auto& [builder, queue] : channels_) {
    std::erase_if(queue, [&](const QueuedBundle& q) {
      return std::any_of(q.bundle.txs().begin(), q.bundle.txs().end(),
                         [&](const Transaction& t) { return ids.contains(t.id()); });
    });
  }
}

void Mempool::expire_private(std::uint64_t min_tick) {
  for (auto& [builder, queue] : channels_)
    std::erase_if(queue, [&](const QueuedBundle& q) { return q.submitted_tick < min_tick; });
}

}  // namespace mevsim
