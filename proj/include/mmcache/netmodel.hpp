#pragma once

#include <cstdint>
#include <vector>

#include "mmcache/catalog.hpp"

namespace mmcache::net {

struct EdgeNode {
  int node_id = 0;
  double access_bw_bps = 1e9;
  double backbone_bw_bps = 100e9;
  std::int64_t cache_capacity_bytes = 0;
};

struct TopologyConfig {
  int node_count = 6;
  double access_bw_bps = 1e9;
  double backbone_bw_bps = 100e9;
  int backbone_hops = 4;  // extra hops to origin on a miss
  double per_hop_propagation_s = 0.00025;
  // Contents are delivered as uniform per-modality packets; latency is judged
  // on the first packet.
  std::int64_t video_packet_bytes = 64'000;
  std::int64_t audio_packet_bytes = 512;
  std::int64_t haptic_packet_bytes = 64;

  std::int64_t packet_bytes(catalog::Modality m) const {
    switch (m) {
      case catalog::Modality::video: return video_packet_bytes;
      case catalog::Modality::audio: return audio_packet_bytes;
      case catalog::Modality::haptic: return haptic_packet_bytes;
    }
    return video_packet_bytes;
  }
};

// Remaining link capacity for the slot in progress; allocations are released
// at the slot boundary via reset().
struct SlotLedger {
  std::vector<double> access_remaining_bps;
  double backbone_remaining_bps = 0;

  explicit SlotLedger(const TopologyConfig& topo) { reset(topo); }
  void reset(const TopologyConfig& topo) {
    access_remaining_bps.assign(static_cast<std::size_t>(topo.node_count), topo.access_bw_bps);
    backbone_remaining_bps = topo.backbone_bw_bps;
  }
};

enum class ServedFrom { edge_cache, origin };

struct TransferOutcome {
  ServedFrom served_from = ServedFrom::origin;
  double allocated_bps = 0;
  int hops = 1;
  double latency_s = 0;
  bool bandwidth_ok = false;
  bool latency_ok = false;
};

int hops_for(bool hit, int backbone_hops);

// Greedy FCFS allocation: grants min(content cap, remaining capacity on every
// traversed link) and charges it to the ledger. Shortfall shows up in the
// outcome flags, never as an error.
TransferOutcome admit_transfer(SlotLedger& ledger, const TopologyConfig& topo, int node_id,
                               const catalog::Content& content, bool hit);

inline bool qos_satisfied(const TransferOutcome& o) { return o.bandwidth_ok && o.latency_ok; }

}  // namespace mmcache::net
