#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmcache/catalog.hpp"
#include "mmcache/drl.hpp"
#include "mmcache/importance.hpp"

namespace mmcache::cache {

struct CacheEntry {
  std::int64_t content_id = 0;
  std::int64_t size_bytes = 0;
  double importance = 0;
  std::int64_t last_access = 0;
  std::int64_t inserted_at = 0;
};

struct CacheDecision {
  bool cached = false;
  std::vector<std::int64_t> evicted;
};

// One node's cache. Evictions are planned first and committed only when the
// incoming item actually fits, so a rejected arrival never discards entries.
class CacheState {
 public:
  explicit CacheState(std::int64_t capacity_bytes);

  // Hit bumps recency; miss leaves the state untouched.
  bool lookup(std::int64_t content_id, std::int64_t slot);
  bool contains(std::int64_t content_id) const;

  std::int64_t capacity_bytes() const { return capacity_; }
  std::int64_t used_bytes() const { return used_; }
  std::int64_t free_bytes() const { return capacity_ - used_; }
  const std::map<std::int64_t, CacheEntry>& entries() const { return entries_; }

  void refresh_importance(std::int64_t content_id, double importance);

  // Importance-ordered admission: cache directly when space allows, otherwise
  // evict strictly-less-important entries (oldest recency first on ties)
  // until the item fits; reject without side effects when they cannot free
  // enough.  Re-arrival of a cached item only refreshes importance/recency.
  CacheDecision on_content_arrival(const catalog::Content& content, double importance, std::int64_t slot);

  // The eviction plan on_content_arrival would commit: the shortest prefix of
  // the (importance asc, last_access asc, id asc) order that frees `needed`
  // bytes, cut short at the first entry not less important than the arrival.
  std::vector<std::int64_t> plan_evictions(std::int64_t needed_bytes, double incoming_importance) const;

  // Recency-ordered admission (always admits anything that can ever fit).
  CacheDecision lru_admit(const catalog::Content& content, std::int64_t slot);

 private:
  void insert(const catalog::Content& content, double importance, std::int64_t slot);
  void erase(std::int64_t content_id);

  std::int64_t capacity_ = 0;
  std::int64_t used_ = 0;
  std::map<std::int64_t, CacheEntry> entries_;
};

// Windowed-popularity admission test: admit when the content's request count
// in the node's observer window reaches the window's mean per-content count.
bool dpwcs_admit(const importance::RequestWindow& window, std::int64_t content_id);

// Binary-action baseline state: a content one-hot over the initial catalog
// (later releases encode as all-zero), plus node load and free-space share.
drl::Vec encode_cpdqn_state(std::int64_t content_id, std::int64_t initial_catalog_size, double load_norm,
                            double free_fraction);

inline constexpr int kCpdqnSkip = 0;
inline constexpr int kCpdqnAdmit = 1;

void write_cache_csv(const std::vector<std::pair<int, const CacheState*>>& nodes, const std::string& path);

}  // namespace mmcache::cache
