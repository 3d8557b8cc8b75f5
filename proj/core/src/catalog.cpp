#include "etas/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "etas/errors.hpp"

namespace etas {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream row(line);
  while (std::getline(row, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

int find_column(const std::vector<std::string>& header, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = lower(header[i]);
    for (const auto& n : names) {
      if (h == lower(n)) return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

bool event_order(const Event& lhs, const Event& rhs) noexcept {
  if (lhs.time != rhs.time) return lhs.time < rhs.time;
  if (lhs.magnitude != rhs.magnitude) return lhs.magnitude > rhs.magnitude;
  return lhs.id < rhs.id;
}

void TimeDomain::validate() const {
  if (!std::isfinite(t1) || !std::isfinite(t2) || !std::isfinite(m0)) {
    throw DomainError("time domain bounds must be finite");
  }
  if (!(t1 < t2)) throw DomainError("time domain requires T1 < T2");
}

Catalog::Catalog(std::vector<Event> events, std::string reference_epoch)
    : events_(std::move(events)), reference_epoch_(std::move(reference_epoch)) {
  std::unordered_set<std::int64_t> ids;
  ids.reserve(events_.size());
  for (const auto& e : events_) {
    if (!std::isfinite(e.time) || !std::isfinite(e.magnitude)) {
      throw DomainError("event " + std::to_string(e.id) + " has a non-finite time or magnitude");
    }
    if (!ids.insert(e.id).second) throw DomainError("duplicate event id " + std::to_string(e.id));
  }
  std::sort(events_.begin(), events_.end(), event_order);
}

std::int64_t Catalog::next_id() const noexcept {
  std::int64_t next = 0;
  for (const auto& e : events_) next = std::max(next, e.id + 1);
  return next;
}

Catalog read_catalog_csv(std::istream& in, const CsvColumns& columns) {
  std::string line;
  std::size_t line_no = 0;
  int time_col = -1;
  int mag_col = -1;
  int id_col = -1;
  bool have_header = false;

  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto header = split_row(line);
    time_col = find_column(header, columns.time);
    mag_col = find_column(header, columns.magnitude);
    id_col = find_column(header, columns.id);
    if (time_col < 0 || mag_col < 0) {
      throw ParseError("header must name time and magnitude columns", line_no);
    }
    have_header = true;
  }
  if (!have_header) return Catalog{};

  std::vector<Event> events;
  const auto needed = static_cast<std::size_t>(std::max({time_col, mag_col, id_col}) + 1);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() < needed) {
      throw ParseError("line " + std::to_string(line_no) + ": expected at least " + std::to_string(needed) +
                           " fields",
                       line_no);
    }
    Event e;
    if (!parse_number(fields[time_col], e.time)) {
      throw ParseError("line " + std::to_string(line_no) + ": cannot parse time '" + fields[time_col] + "'",
                       line_no);
    }
    if (!parse_number(fields[mag_col], e.magnitude)) {
      throw ParseError("line " + std::to_string(line_no) + ": cannot parse magnitude '" + fields[mag_col] + "'",
                       line_no);
    }
    if (!std::isfinite(e.time) || !std::isfinite(e.magnitude)) {
      throw ParseError("line " + std::to_string(line_no) + ": non-finite time or magnitude", line_no);
    }
    if (id_col >= 0) {
      if (!parse_number(fields[id_col], e.id)) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse id '" + fields[id_col] + "'", line_no);
      }
    } else {
      e.id = static_cast<std::int64_t>(events.size());
    }
    events.push_back(e);
  }
  try {
    return Catalog(std::move(events));
  } catch (const DomainError& err) {
    throw ParseError(err.what(), line_no);
  }
}

Catalog load_catalog(const std::filesystem::path& path, const CsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalogue file " + path.string(), 0);
  return read_catalog_csv(in, columns);
}

void write_catalog_csv(const Catalog& catalog, std::ostream& out) {
  out << "time,magnitude,id\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : catalog) out << e.time << ',' << e.magnitude << ',' << e.id << '\n';
}

void write_catalog_csv(const Catalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalogue file " + path.string());
  write_catalog_csv(catalog, out);
}

nlohmann::json catalog_to_json(const Catalog& catalog) {
  auto arr = nlohmann::json::array();
  for (const auto& e : catalog) arr.push_back({{"time", e.time}, {"magnitude", e.magnitude}, {"id", e.id}});
  return {{"reference_epoch", catalog.reference_epoch()}, {"events", arr}};
}

Catalog catalog_from_json(const nlohmann::json& j) {
  // a bare event array is accepted as well
  const auto& arr = j.is_array() ? j : j.at("events");
  std::vector<Event> events;
  events.reserve(arr.size());
  for (const auto& item : arr) {
    events.push_back({item.at("time").get<double>(), item.at("magnitude").get<double>(),
                      item.at("id").get<std::int64_t>()});
  }
  return Catalog(std::move(events), j.is_array() ? std::string{} : j.value("reference_epoch", std::string{}));
}

DomainSplit split_domain(const Catalog& catalog, const TimeDomain& domain) {
  domain.validate();
  std::vector<Event> history;
  std::vector<Event> modeled;
  std::size_t discarded = 0;
  for (const auto& e : catalog) {
    if (e.magnitude < domain.m0 || e.time > domain.t2) {
      ++discarded;
    } else if (e.time < domain.t1) {
      history.push_back(e);
    } else {
      modeled.push_back(e);
    }
  }
  return {Catalog(std::move(history), catalog.reference_epoch()),
          Catalog(std::move(modeled), catalog.reference_epoch()), discarded};
}

CatalogReport validate(const Catalog& catalog, const TimeDomain& domain) {
  CatalogReport report;
  report.n_events = catalog.size();
  if (catalog.empty()) return report;
  report.min_time = catalog.events().front().time;
  report.max_time = catalog.events().back().time;
  report.min_magnitude = std::numeric_limits<double>::infinity();
  report.max_magnitude = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& e = catalog[i];
    report.min_magnitude = std::min(report.min_magnitude, e.magnitude);
    report.max_magnitude = std::max(report.max_magnitude, e.magnitude);
    if (e.magnitude < domain.m0) ++report.below_m0;
    if (i > 0 && catalog[i - 1].time == e.time) ++report.duplicate_times;
  }
  return report;
}

}  // namespace etas
