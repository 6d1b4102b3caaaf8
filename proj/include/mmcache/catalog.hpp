#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmcache::catalog {

enum class Modality { video, audio, haptic };

// The eleven supported content classes and their delivery requirements.
enum class ModalityClass {
  video_1080p_30fps,
  video_1080p_60fps,
  video_4k_30fps,
  video_4k_60fps,
  video_8k_30fps,
  video_8k_60fps,
  audio_mp3,
  audio_bluray,
  audio_home_theater,
  haptic_low_fidelity,
  haptic_high_fidelity,
};

inline constexpr int kModalityClassCount = 11;

struct QosRequirement {
  double min_bandwidth_bps = 0;  // below this the transfer is unsatisfied
  double max_bandwidth_bps = 0;  // a transfer never consumes more than this
  double max_latency_s = 0;
};

struct Content {
  std::int64_t id = 0;
  ModalityClass modality_class = ModalityClass::video_1080p_30fps;
  Modality modality = Modality::video;
  std::int64_t size_bytes = 0;
  QosRequirement qos;
};

struct Catalog {
  std::vector<Content> contents;  // sorted by id
  std::int64_t next_id = 1;

  const Content& by_id(std::int64_t id) const;
  bool has_id(std::int64_t id) const;
};

struct CatalogSpec {
  std::int64_t count = 0;
  double video_fraction = 0.4;
  double audio_fraction = 0.3;
  double haptic_fraction = 0.3;
  std::int64_t video_size_min_bytes = 50'000'000;
  std::int64_t video_size_max_bytes = 500'000'000;
  std::int64_t audio_size_min_bytes = 1'000'000;
  std::int64_t audio_size_max_bytes = 10'000'000;
  std::int64_t haptic_size_min_bytes = 10'000;
  std::int64_t haptic_size_max_bytes = 500'000;
  std::uint64_t seed = 1;
};

QosRequirement qos_profile(ModalityClass cls);
QosRequirement qos_profile(const std::string& class_name);
Modality modality_of(ModalityClass cls);

const std::string& modality_class_name(ModalityClass cls);
ModalityClass parse_modality_class(const std::string& name);
const std::string& modality_name(Modality m);
Modality parse_modality(const std::string& name);

const std::vector<ModalityClass>& classes_of(Modality m);

// Deterministically samples `count` contents with the configured modality mix
// (largest-remainder apportionment) and per-modality uniform sizes; the final
// id order is a seeded shuffle so modality is uncorrelated with id.
Catalog build_catalog(const CatalogSpec& spec);

// Appends a new content with id = next_id; never touches existing entries.
const Content& release_content(Catalog& cat, ModalityClass cls, std::int64_t size_bytes);

void write_catalog_csv(const Catalog& cat, const std::string& path);
Catalog read_catalog_csv(const std::string& path);

}  // namespace mmcache::catalog
