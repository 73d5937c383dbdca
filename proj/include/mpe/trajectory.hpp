#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mpe {

// One observation of a moving object: (object, arrival time, location).
struct Record {
  std::string object;
  int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string location;

  bool operator==(const Record&) const = default;
};

// A GPS ping before grid discretization.
struct GpsRecord {
  std::string object;
  int64_t timestamp = 0;
  double lat = 0.0;
  double lon = 0.0;
};

// Equi-sized buckets over an optional within-day window, in local minutes.
struct TimeSlotting {
  int slot_minutes = 30;
  int window_start_minute = 0;          // inclusive
  int window_end_minute = 24 * 60;      // exclusive

  int slot_count() const {
    return (window_end_minute - window_start_minute) / slot_minutes;
  }
  void validate() const;  // throws DataError
};

// Equal-sized cells over a lat/lon bounding box, row-major indexing.
struct GridSpec {
  double min_lat = 0.0, max_lat = 0.0;
  double min_lon = 0.0, max_lon = 0.0;
  double cell_size_deg = 0.0;

  int n_rows() const;
  int n_cols() const;
  void validate() const;
};

// Epoch seconds (plain non-negative integer) or ISO-8601
// ("YYYY-MM-DD[T ]HH:MM:SS" with optional "Z" or "+HH:MM" offset).
std::optional<int64_t> parse_timestamp(std::string_view field);

// Rows are `object_id,timestamp,location_id`. A leading header row with
// those exact column names is skipped; anything else malformed is an error
// with its line number. Empty input gives an empty list.
std::vector<Record> parse_triple_csv(std::istream& in);

// Rows are `object_id,timestamp,lat,lon`. Cell mapping is a separate step.
std::vector<GpsRecord> parse_gps_csv(std::istream& in);

// Cell token "C<row*n_cols+col>". Points on the max edge clamp to the last
// row/col; points outside the box are a DataError.
std::string map_gps_to_cell(double lat, double lon, const GridSpec& grid);

// Applies map_gps_to_cell to every ping, skipping out-of-box points.
// `skipped`, when non-null, receives the number of dropped records.
std::vector<Record> map_gps_records(const std::vector<GpsRecord>& pings,
                                    const GridSpec& grid,
                                    size_t* skipped = nullptr);

// Slot index for a timestamp, or nullopt when the local minute-of-day
// falls outside the window (callers drop such records).
std::optional<int> discretize_time(int64_t timestamp, const TimeSlotting& slotting,
                                   int tz_offset_minutes);

// The supervised unit: a record joined with the object's next location.
// All fields are tokens; the slot is the decimal slot index.
struct TokenQuadruple {
  std::string object;
  std::string slot;
  std::string current;
  std::string next;

  bool operator==(const TokenQuadruple&) const = default;
};

inline constexpr int64_t kNoGapLimit = std::numeric_limits<int64_t>::max();

struct QuadrupleBuildOptions {
  TimeSlotting slotting;
  int tz_offset_minutes = 0;
  int64_t max_gap_seconds = kNoGapLimit;
  bool drop_self_loops = false;
};

// Groups records by object, sorts by (timestamp, location token), and emits
// one quadruple per consecutive pair within the gap limit whose earlier
// record lies inside the time window. The slot is the earlier record's.
std::vector<TokenQuadruple> build_quadruples(std::vector<Record> records,
                                             const QuadrupleBuildOptions& opts);

// Drops quadruples whose (current, next) pair occurs fewer than
// `threshold` times in the corpus.
std::vector<TokenQuadruple> filter_by_transition_frequency(
    const std::vector<TokenQuadruple>& quadruples, int64_t threshold);

struct SplitRatios {
  int train = 8;
  int validation = 1;
  int test = 1;
};

struct SplitResult {
  std::vector<TokenQuadruple> train;
  std::vector<TokenQuadruple> validation;
  std::vector<TokenQuadruple> test;
};

// Seeded shuffle, then floor-allocated partition with remainders going to
// train. Identical (input, seed) gives identical partitions.
SplitResult split_quadruples(std::vector<TokenQuadruple> quadruples,
                             const SplitRatios& ratios, uint64_t seed);

void write_records_csv(std::ostream& out, const std::vector<Record>& records);
void write_quadruples_csv(std::ostream& out,
                          const std::vector<TokenQuadruple>& quadruples);
std::vector<TokenQuadruple> read_quadruples_csv(std::istream& in);

}  // namespace mpe
