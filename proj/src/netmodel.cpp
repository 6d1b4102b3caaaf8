#include "mmcache/netmodel.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mmcache::net {

int hops_for(bool hit, int backbone_hops) { return hit ? 1 : 1 + backbone_hops; }

TransferOutcome admit_transfer(SlotLedger& ledger, const TopologyConfig& topo, int node_id,
                               const catalog::Content& content, bool hit) {
  if (node_id < 0 || static_cast<std::size_t>(node_id) >= ledger.access_remaining_bps.size())
    throw std::out_of_range("admit_transfer: unknown node");

  TransferOutcome out;
  out.served_from = hit ? ServedFrom::edge_cache : ServedFrom::origin;
  out.hops = hops_for(hit, topo.backbone_hops);

  double available = ledger.access_remaining_bps[static_cast<std::size_t>(node_id)];
  if (!hit) available = std::min(available, ledger.backbone_remaining_bps);
  out.allocated_bps = std::max(0.0, std::min(content.qos.max_bandwidth_bps, available));

  ledger.access_remaining_bps[static_cast<std::size_t>(node_id)] -= out.allocated_bps;
  if (!hit) ledger.backbone_remaining_bps -= out.allocated_bps;

  const double packet_bits = 8.0 * static_cast<double>(topo.packet_bytes(content.modality));
  out.latency_s = out.allocated_bps > 0
                      ? out.hops * topo.per_hop_propagation_s + packet_bits / out.allocated_bps
                      : std::numeric_limits<double>::infinity();
  out.bandwidth_ok = out.allocated_bps >= content.qos.min_bandwidth_bps;
  out.latency_ok = out.latency_s <= content.qos.max_latency_s;
  return out;
}

}  // namespace mmcache::net
