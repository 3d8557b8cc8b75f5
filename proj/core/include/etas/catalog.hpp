#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace etas {

struct Event {
  double time{0.0};       // days since the catalogue reference epoch
  double magnitude{0.0};  // moment magnitude
  std::int64_t id{0};

  friend bool operator==(const Event&, const Event&) = default;
};

/// Catalogue ordering: ascending time, then descending magnitude so a
/// mainshock precedes same-time aftershocks, then ascending id.
[[nodiscard]] bool event_order(const Event& lhs, const Event& rhs) noexcept;

/// Model domain [t1, t2] with minimum modelled magnitude m0.
struct TimeDomain {
  double t1{0.0};
  double t2{1000.0};
  double m0{2.5};

  /// Throws DomainError unless t1 < t2 and every bound is finite.
  void validate() const;
  [[nodiscard]] double length() const noexcept { return t2 - t1; }
};

/// Immutable, sorted collection of events with unique ids.
class Catalog {
 public:
  Catalog() = default;
  /// Sorts by `event_order`; throws DomainError on duplicate ids or
  /// non-finite values.
  explicit Catalog(std::vector<Event> events, std::string reference_epoch = {});

  [[nodiscard]] std::span<const Event> events() const noexcept { return events_; }
  [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
  [[nodiscard]] bool empty() const noexcept { return events_.empty(); }
  [[nodiscard]] const Event& operator[](std::size_t i) const { return events_[i]; }
  [[nodiscard]] auto begin() const noexcept { return events_.cbegin(); }
  [[nodiscard]] auto end() const noexcept { return events_.cend(); }
  [[nodiscard]] const std::string& reference_epoch() const noexcept { return reference_epoch_; }

  /// Largest id plus one (0 for an empty catalogue).
  [[nodiscard]] std::int64_t next_id() const noexcept;

 private:
  std::vector<Event> events_;
  std::string reference_epoch_;
};

/// Accepted header names for each CSV column (matched case-insensitively).
struct CsvColumns {
  std::vector<std::string> time{"time", "ts", "t"};
  std::vector<std::string> magnitude{"magnitude", "mag", "m"};
  std::vector<std::string> id{"id", "idx.p"};
};

/// Reads `time,magnitude[,id]` CSV. Rows without an id column get their
/// 0-based row index as id. Throws ParseError naming the offending line.
[[nodiscard]] Catalog load_catalog(const std::filesystem::path& path, const CsvColumns& columns = {});
[[nodiscard]] Catalog read_catalog_csv(std::istream& in, const CsvColumns& columns = {});

/// Writes `time,magnitude,id` with round-trip precision.
void write_catalog_csv(const Catalog& catalog, std::ostream& out);
void write_catalog_csv(const Catalog& catalog, const std::filesystem::path& path);

[[nodiscard]] nlohmann::json catalog_to_json(const Catalog& catalog);
[[nodiscard]] Catalog catalog_from_json(const nlohmann::json& j);

struct DomainSplit {
  Catalog history;  // t < t1, m >= m0
  Catalog modeled;  // t1 <= t <= t2, m >= m0
  std::size_t discarded{0};
};

/// Partitions a catalogue around the model domain. Events after t2 or
/// below m0 are discarded.
[[nodiscard]] DomainSplit split_domain(const Catalog& catalog, const TimeDomain& domain);

struct CatalogReport {
  std::size_t n_events{0};
  double min_time{0.0};
  double max_time{0.0};
  double min_magnitude{0.0};
  double max_magnitude{0.0};
  std::size_t below_m0{0};
  std::size_t duplicate_times{0};  // events sharing the time of their predecessor
};

[[nodiscard]] CatalogReport validate(const Catalog& catalog, const TimeDomain& domain);

}  // namespace etas
