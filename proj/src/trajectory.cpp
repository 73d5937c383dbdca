#include "mpe/trajectory.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "mpe/errors.hpp"
#include "mpe/rng.hpp"

namespace mpe {

void TimeSlotting::validate() const {
  if (slot_minutes <= 0) throw DataError("slot_minutes must be positive");
  if (window_start_minute < 0 || window_end_minute > 24 * 60 ||
      window_start_minute >= window_end_minute)
    throw DataError("time window must satisfy 0 <= start < end <= 1440");
  int span = window_end_minute - window_start_minute;
  if (span % slot_minutes != 0)
    throw DataError("window length must be a multiple of slot_minutes");
}

int GridSpec::n_rows() const {
  return static_cast<int>(std::ceil((max_lat - min_lat) / cell_size_deg));
}

int GridSpec::n_cols() const {
  return static_cast<int>(std::ceil((max_lon - min_lon) / cell_size_deg));
}

void GridSpec::validate() const {
  if (!(min_lat < max_lat) || !(min_lon < max_lon))
    throw DataError("grid bounding box is empty");
  if (!(cell_size_deg > 0)) throw DataError("cell_size_deg must be positive");
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

std::optional<int64_t> parse_int(std::string_view s) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
int64_t days_from_civil(int64_t y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

std::optional<int64_t> parse_iso8601(std::string_view s) {
  // YYYY-MM-DD[T ]HH:MM:SS with optional Z or +-HH:MM suffix.
  if (s.size() < 19) return std::nullopt;
  auto num = [&](size_t pos, size_t len) -> std::optional<int> {
    std::string_view f = s.substr(pos, len);
    if (!all_digits(f)) return std::nullopt;
    auto v = parse_int(f);
    return v ? std::optional<int>(static_cast<int>(*v)) : std::nullopt;
  };
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  auto year = num(0, 4), month = num(5, 2), day = num(8, 2);
  auto hour = num(11, 2), minute = num(14, 2), second = num(17, 2);
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31) return std::nullopt;
  if (*hour > 23 || *minute > 59 || *second > 60) return std::nullopt;

  int64_t offset_seconds = 0;
  std::string_view rest = s.substr(19);
  if (!rest.empty()) {
    if (rest == "Z") {
      // UTC
    } else if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 &&
               rest[3] == ':') {
      auto oh = num(20, 2), om = num(23, 2);
      if (!oh || !om || *oh > 23 || *om > 59) return std::nullopt;
      offset_seconds = (*oh * 60 + *om) * 60;
      if (rest[0] == '-') offset_seconds = -offset_seconds;
    } else {
      return std::nullopt;
    }
  }
  int64_t days = days_from_civil(*year, *month, *day);
  return days * 86400 + *hour * 3600 + *minute * 60 + *second - offset_seconds;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_triple_header(const std::vector<std::string>& f) {
  return f.size() == 3 && f[0] == "object_id" && f[1] == "timestamp" &&
         f[2] == "location_id";
}

bool is_gps_header(const std::vector<std::string>& f) {
  return f.size() == 4 && f[0] == "object_id" && f[1] == "timestamp" &&
         f[2] == "lat" && f[3] == "lon";
}

[[noreturn]] void row_error(size_t line_no, const std::string& why) {
  throw DataError("line " + std::to_string(line_no) + ": " + why);
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<int64_t> parse_timestamp(std::string_view field) {
  if (all_digits(field)) return parse_int(field);
  return parse_iso8601(field);
}

std::vector<Record> parse_triple_csv(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (line_no == 1 && is_triple_header(fields)) continue;
    if (fields.size() != 3) row_error(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) row_error(line_no, "empty object_id");
    if (fields[2].empty()) row_error(line_no, "empty location_id");
    auto ts = parse_timestamp(fields[1]);
    if (!ts) row_error(line_no, "unparsable timestamp '" + fields[1] + "'");
    if (*ts < 0) row_error(line_no, "negative timestamp");
    records.push_back(Record{std::move(fields[0]), *ts, std::move(fields[2])});
  }
  return records;
}

std::vector<GpsRecord> parse_gps_csv(std::istream& in) {
  std::vector<GpsRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (line_no == 1 && is_gps_header(fields)) continue;
    if (fields.size() != 4) row_error(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) row_error(line_no, "empty object_id");
    auto ts = parse_timestamp(fields[1]);
    if (!ts) row_error(line_no, "unparsable timestamp '" + fields[1] + "'");
    if (*ts < 0) row_error(line_no, "negative timestamp");
    auto lat = parse_real(fields[2]);
    auto lon = parse_real(fields[3]);
    if (!lat || !lon) row_error(line_no, "unparsable lat/lon");
    records.push_back(GpsRecord{std::move(fields[0]), *ts, *lat, *lon});
  }
  return records;
}

std::string map_gps_to_cell(double lat, double lon, const GridSpec& grid) {
  grid.validate();
  if (lat < grid.min_lat || lat > grid.max_lat || lon < grid.min_lon ||
      lon > grid.max_lon)
    throw DataError("point outside grid bounding box");
  int row = static_cast<int>(std::floor((lat - grid.min_lat) / grid.cell_size_deg));
  int col = static_cast<int>(std::floor((lon - grid.min_lon) / grid.cell_size_deg));
  row = std::min(row, grid.n_rows() - 1);
  col = std::min(col, grid.n_cols() - 1);
  return "C" + std::to_string(static_cast<int64_t>(row) * grid.n_cols() + col);
}

std::vector<Record> map_gps_records(const std::vector<GpsRecord>& pings,
                                    const GridSpec& grid, size_t* skipped) {
  std::vector<Record> out;
  out.reserve(pings.size());
  size_t dropped = 0;
  for (const auto& p : pings) {
    try {
      out.push_back(Record{p.object, p.timestamp, map_gps_to_cell(p.lat, p.lon, grid)});
    } catch (const DataError&) {
      ++dropped;
    }
  }
  if (skipped) *skipped = dropped;
  return out;
}

std::optional<int> discretize_time(int64_t timestamp, const TimeSlotting& slotting,
                                   int tz_offset_minutes) {
  slotting.validate();
  int64_t local = timestamp + static_cast<int64_t>(tz_offset_minutes) * 60;
  int64_t second_of_day = ((local % 86400) + 86400) % 86400;
  int minute_of_day = static_cast<int>(second_of_day / 60);
  if (minute_of_day < slotting.window_start_minute ||
      minute_of_day >= slotting.window_end_minute)
    return std::nullopt;
  return (minute_of_day - slotting.window_start_minute) / slotting.slot_minutes;
}

std::vector<TokenQuadruple> build_quadruples(std::vector<Record> records,
                                             const QuadrupleBuildOptions& opts) {
  opts.slotting.validate();
  std::stable_sort(records.begin(), records.end(),
                   [](const Record& a, const Record& b) {
                     if (a.object != b.object) return a.object < b.object;
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.location < b.location;
                   });
  std::vector<TokenQuadruple> quads;
  for (size_t i = 0; i + 1 < records.size(); ++i) {
    const Record& cur = records[i];
    const Record& nxt = records[i + 1];
    if (cur.object != nxt.object) continue;
    if (nxt.timestamp - cur.timestamp > opts.max_gap_seconds) continue;
    auto slot = discretize_time(cur.timestamp, opts.slotting, opts.tz_offset_minutes);
    if (!slot) continue;
    if (opts.drop_self_loops && cur.location == nxt.location) continue;
    quads.push_back(TokenQuadruple{cur.object, std::to_string(*slot),
                                   cur.location, nxt.location});
  }
  return quads;
}

std::vector<TokenQuadruple> filter_by_transition_frequency(
    const std::vector<TokenQuadruple>& quadruples, int64_t threshold) {
  if (threshold < 1) throw DataError("frequency threshold must be >= 1");
  std::unordered_map<std::string, int64_t> counts;
  auto key = [](const TokenQuadruple& q) { return q.current + '\x1f' + q.next; };
  for (const auto& q : quadruples) ++counts[key(q)];
  std::vector<TokenQuadruple> kept;
  kept.reserve(quadruples.size());
  for (const auto& q : quadruples)
    if (counts[key(q)] >= threshold) kept.push_back(q);
  return kept;
}

SplitResult split_quadruples(std::vector<TokenQuadruple> quadruples,
                             const SplitRatios& ratios, uint64_t seed) {
  if (ratios.train <= 0 || ratios.validation <= 0 || ratios.test <= 0)
    throw DataError("split ratios must be positive");
  size_t n = quadruples.size();
  if (n < 3) throw DataError("need at least 3 quadruples to split");
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(quadruples);
  int64_t total = ratios.train + ratios.validation + ratios.test;
  size_t n_val = static_cast<size_t>(static_cast<int64_t>(n) * ratios.validation / total);
  size_t n_test = static_cast<size_t>(static_cast<int64_t>(n) * ratios.test / total);
  size_t n_train = n - n_val - n_test;
  SplitResult out;
  out.train.assign(quadruples.begin(), quadruples.begin() + n_train);
  out.validation.assign(quadruples.begin() + n_train, quadruples.begin() + n_train + n_val);
  out.test.assign(quadruples.begin() + n_train + n_val, quadruples.end());
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records)
    out << r.object << ',' << r.timestamp << ',' << r.location << '\n';
}

void write_quadruples_csv(std::ostream& out,
                          const std::vector<TokenQuadruple>& quadruples) {
  for (const auto& q : quadruples)
    out << q.object << ',' << q.slot << ',' << q.current << ',' << q.next << '\n';
}

std::vector<TokenQuadruple> read_quadruples_csv(std::istream& in) {
  std::vector<TokenQuadruple> quads;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) row_error(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    for (const auto& f : fields)
      if (f.empty()) row_error(line_no, "empty field");
    quads.push_back(TokenQuadruple{std::move(fields[0]), std::move(fields[1]),
                                   std::move(fields[2]), std::move(fields[3])});
  }
  return quads;
}

}  // namespace mpe
