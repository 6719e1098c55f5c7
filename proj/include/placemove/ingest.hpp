#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "placemove/geo.hpp"

namespace placemove {

struct Place {
    PlaceId id = 0;            // dense, 0..|N|-1
    std::string external_id;   // opaque source identifier
    GeoPoint location;
    uint32_t category = 0;     // index into CategoryTable
};

struct CategoryTable {
    std::vector<std::string> names;  // id -> label, in order of first appearance

    uint32_t intern(const std::string& name);
    size_t size() const { return names.size(); }
};

struct PlaceSet {
    std::vector<Place> places;
    CategoryTable categories;

    std::vector<GeoPoint> locations() const;
};

struct RawTripRecord {
    std::optional<GeoPoint> pickup;
    std::optional<GeoPoint> dropoff;
    int64_t pickup_time = 0;   // epoch seconds
    int64_t dropoff_time = 0;
};

struct Trip {
    PlaceId origin = 0;
    PlaceId dest = 0;
    int64_t depart = 0;  // epoch seconds
    int64_t arrive = 0;
};

struct CheckinCounts {
    std::vector<uint64_t> counts;  // per place-id, drop-offs of retained trips

    uint64_t total() const;
};

struct DropStats {
    uint64_t total = 0;
    uint64_t retained = 0;
    std::map<std::string, uint64_t> dropped_by_reason;

    uint64_t dropped() const;
    double retention() const { return total == 0 ? 1.0 : double(retained) / double(total); }
};

// Places CSV: header `external_id,lat,lon,category`.
// Throws std::runtime_error naming the offending line on malformed rows,
// out-of-range coordinates, or duplicate external ids.
PlaceSet load_places(const std::string& path);

void write_places(const std::string& path, const PlaceSet& ps);

// Trips CSV: header
// `pickup_datetime,dropoff_datetime,pickup_lon,pickup_lat,dropoff_lon,dropoff_lat`.
// Datetime columns are ISO-8601 or epoch integers, auto-detected per column
// from the first non-empty value. Empty coordinate fields mean missing.
std::vector<RawTripRecord> load_trips_csv(const std::string& path,
                                          int64_t utc_offset_seconds = 0);

struct SnapResult {
    std::vector<Trip> trips;
    CheckinCounts checkins;
    DropStats stats;
};

// Snap both endpoints of each record to the nearest place within radius_m.
// Dirty records are counted, never fatal. Origin may equal destination.
SnapResult snap_trips(const std::vector<RawTripRecord>& raw, const GridIndex& index,
                      size_t n_places, double radius_m = 200.0);

// Binary snapped-trip cache: 12-byte magic + u32 version header, then
// little-endian (u32 origin, u32 dest, i64 depart, i64 arrive) records.
void write_trip_cache(const std::string& path, const std::vector<Trip>& trips);
std::vector<Trip> read_trip_cache(const std::string& path);

// ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS" (or bare epoch integer) to epoch seconds.
int64_t parse_datetime(const std::string& s, int64_t utc_offset_seconds = 0);

}  // namespace placemove
