#include "mmcache/cache.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "mmcache/csv.hpp"

namespace mmcache::cache {

CacheState::CacheState(std::int64_t capacity_bytes) : capacity_(capacity_bytes) {
  if (capacity_bytes < 0) throw std::invalid_argument("CacheState: negative capacity");
}

bool CacheState::lookup(std::int64_t content_id, std::int64_t slot) {
  const auto it = entries_.find(content_id);
  if (it == entries_.end()) return false;
  it->second.last_access = slot;
  return true;
}

bool CacheState::contains(std::int64_t content_id) const { return entries_.count(content_id) != 0; }

void CacheState::refresh_importance(std::int64_t content_id, double importance) {
  const auto it = entries_.find(content_id);
  if (it != entries_.end()) it->second.importance = importance;
}

void CacheState::insert(const catalog::Content& content, double importance, std::int64_t slot) {
  entries_[content.id] = CacheEntry{content.id, content.size_bytes, importance, slot, slot};
  used_ += content.size_bytes;
}

void CacheState::erase(std::int64_t content_id) {
  const auto it = entries_.find(content_id);
  if (it == entries_.end()) throw std::logic_error("erase of uncached content");
  used_ -= it->second.size_bytes;
  entries_.erase(it);
}

std::vector<std::int64_t> CacheState::plan_evictions(std::int64_t needed_bytes, double incoming_importance) const {
  std::vector<const CacheEntry*> order;
  order.reserve(entries_.size());
  for (const auto& [_, e] : entries_) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const CacheEntry* a, const CacheEntry* b) {
    if (a->importance != b->importance) return a->importance < b->importance;
    if (a->last_access != b->last_access) return a->last_access < b->last_access;
    return a->content_id < b->content_id;
  });

  std::vector<std::int64_t> victims;
  std::int64_t freed = 0;
  for (const CacheEntry* e : order) {
    if (freed >= needed_bytes) break;
    if (e->importance >= incoming_importance) break;
    victims.push_back(e->content_id);
    freed += e->size_bytes;
  }
  if (freed < needed_bytes) return victims;  // possibly insufficient; caller decides
  return victims;
}

CacheDecision CacheState::on_content_arrival(const catalog::Content& content, double importance, std::int64_t slot) {
  if (contains(content.id)) {
    refresh_importance(content.id, importance);
    entries_[content.id].last_access = slot;
    return CacheDecision{true, {}};
  }
  if (content.size_bytes > capacity_) return CacheDecision{false, {}};
  if (content.size_bytes <= free_bytes()) {
    insert(content, importance, slot);
    return CacheDecision{true, {}};
  }
  const std::int64_t needed = content.size_bytes - free_bytes();
  std::vector<std::int64_t> victims = plan_evictions(needed, importance);
  std::int64_t freed = 0;
  for (std::int64_t id : victims) freed += entries_.at(id).size_bytes;
  if (freed < needed) return CacheDecision{false, {}};
  for (std::int64_t id : victims) erase(id);
  insert(content, importance, slot);
  return CacheDecision{true, std::move(victims)};
}

CacheDecision CacheState::lru_admit(const catalog::Content& content, std::int64_t slot) {
  if (contains(content.id)) {
    entries_[content.id].last_access = slot;
    return CacheDecision{true, {}};
  }
  if (content.size_bytes > capacity_) return CacheDecision{false, {}};

  std::vector<const CacheEntry*> order;
  order.reserve(entries_.size());
  for (const auto& [_, e] : entries_) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const CacheEntry* a, const CacheEntry* b) {
    if (a->last_access != b->last_access) return a->last_access < b->last_access;
    if (a->inserted_at != b->inserted_at) return a->inserted_at < b->inserted_at;
    return a->content_id < b->content_id;
  });

  std::vector<std::int64_t> victims;
  std::int64_t freed = free_bytes();
  for (const CacheEntry* e : order) {
    if (freed >= content.size_bytes) break;
    victims.push_back(e->content_id);
    freed += e->size_bytes;
  }
  for (std::int64_t id : victims) erase(id);
  insert(content, 0.0, slot);
  return CacheDecision{true, std::move(victims)};
}

bool dpwcs_admit(const importance::RequestWindow& window, std::int64_t content_id) {
  return static_cast<double>(window.content_count(content_id)) >= window.mean_count_per_content();
}

drl::Vec encode_cpdqn_state(std::int64_t content_id, std::int64_t initial_catalog_size, double load_norm,
                            double free_fraction) {
  if (initial_catalog_size <= 0) throw std::invalid_argument("encode_cpdqn_state: empty catalog");
  drl::Vec out(static_cast<std::size_t>(initial_catalog_size) + 2, 0.0);
  if (content_id >= 1 && content_id <= initial_catalog_size) out[static_cast<std::size_t>(content_id - 1)] = 1.0;
  out[out.size() - 2] = load_norm < 0 ? 0 : (load_norm > 1 ? 1 : load_norm);
  out[out.size() - 1] = free_fraction < 0 ? 0 : (free_fraction > 1 ? 1 : free_fraction);
  return out;
}

void write_cache_csv(const std::vector<std::pair<int, const CacheState*>>& nodes, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "node_id,content_id,size_bytes,importance,last_access\n";
  std::vector<std::pair<int, const CacheState*>> ordered = nodes;
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [node_id, cache] : ordered) {
    for (const auto& [id, e] : cache->entries()) {
      out << node_id << ',' << id << ',' << e.size_bytes << ',' << fmt_double(e.importance) << ','
          << e.last_access << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mmcache::cache
