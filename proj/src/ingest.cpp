#include "placemove/ingest.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace placemove {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void fail(const std::string& path, size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& s, const std::string& path, size_t line_no,
                    const char* field) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
        fail(path, line_no, std::string("bad ") + field + " value '" + s + "'");
    return v;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

// days since 1970-01-01 for a proleptic Gregorian civil date
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

}  // namespace

int64_t parse_datetime(const std::string& s, int64_t utc_offset_seconds) {
    if (is_integer(s)) {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{}) throw std::runtime_error("bad epoch timestamp '" + s + "'");
        return v;
    }
    int y, mo, d, h, mi, se;
    char sep;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &se) != 7 ||
        (sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 ||
        h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60)
        throw std::runtime_error("bad datetime '" + s + "'");
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se - utc_offset_seconds;
}

uint32_t CategoryTable::intern(const std::string& name) {
    for (uint32_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    names.push_back(name);
    return static_cast<uint32_t>(names.size() - 1);
}

std::vector<GeoPoint> PlaceSet::locations() const {
    std::vector<GeoPoint> out;
    out.reserve(places.size());
    for (const auto& p : places) out.push_back(p.location);
    return out;
}

uint64_t CheckinCounts::total() const {
    uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

uint64_t DropStats::dropped() const {
    uint64_t s = 0;
    for (const auto& [_, n] : dropped_by_reason) s += n;
    return s;
}

PlaceSet load_places(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open places file: " + path);

    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
    if (split_csv(line) != std::vector<std::string>{"external_id", "lat", "lon", "category"})
        fail(path, line_no, "expected header 'external_id,lat,lon,category'");

    PlaceSet ps;
    std::unordered_map<std::string, size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 4) fail(path, line_no, "expected 4 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) fail(path, line_no, "empty external_id");
        if (auto it = seen.find(f[0]); it != seen.end())
            fail(path, line_no, "duplicate external_id '" + f[0] + "' (first at line " +
                                    std::to_string(it->second) + ")");
        seen.emplace(f[0], line_no);

        double lat = parse_double(f[1], path, line_no, "lat");
        double lon = parse_double(f[2], path, line_no, "lon");
        if (!GeoPoint::valid(lat, lon))
            fail(path, line_no, "coordinates out of range (" + f[1] + "," + f[2] + ")");

        Place p;
        p.id = static_cast<PlaceId>(ps.places.size());
        p.external_id = f[0];
        p.location = GeoPoint{lat, lon};
        p.category = ps.categories.intern(f[3]);
        ps.places.push_back(std::move(p));
    }
    return ps;
}

void write_places(const std::string& path, const PlaceSet& ps) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write places file: " + path);
    out << "external_id,lat,lon,category\n";
    char buf[64];
    for (const auto& p : ps.places) {
        std::snprintf(buf, sizeof(buf), "%.9f,%.9f", p.location.lat, p.location.lon);
        out << p.external_id << ',' << buf << ',' << ps.categories.names[p.category] << '\n';
    }
}

std::vector<RawTripRecord> load_trips_csv(const std::string& path, int64_t utc_offset_seconds) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trips file: " + path);

    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
    const std::vector<std::string> want = {"pickup_datetime", "dropoff_datetime",
                                           "pickup_lon",      "pickup_lat",
                                           "dropoff_lon",     "dropoff_lat"};
    if (split_csv(line) != want)
        fail(path, line_no,
             "expected header "
             "'pickup_datetime,dropoff_datetime,pickup_lon,pickup_lat,dropoff_lon,dropoff_lat'");

    std::vector<RawTripRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 6) fail(path, line_no, "expected 6 fields, got " + std::to_string(f.size()));

        RawTripRecord r;
        try {
            r.pickup_time = parse_datetime(f[0], utc_offset_seconds);
            r.dropoff_time = parse_datetime(f[1], utc_offset_seconds);
        } catch (const std::exception& e) {
            fail(path, line_no, e.what());
        }
        auto read_point = [&](const std::string& lon_s,
                              const std::string& lat_s) -> std::optional<GeoPoint> {
            if (lon_s.empty() || lat_s.empty()) return std::nullopt;
            double lon = parse_double(lon_s, path, line_no, "lon");
            double lat = parse_double(lat_s, path, line_no, "lat");
            if (!GeoPoint::valid(lat, lon)) return std::nullopt;  // treated as missing
            return GeoPoint{lat, lon};
        };
        r.pickup = read_point(f[2], f[3]);
        r.dropoff = read_point(f[4], f[5]);
        out.push_back(r);
    }
    return out;
}

SnapResult snap_trips(const std::vector<RawTripRecord>& raw, const GridIndex& index,
                      size_t n_places, double radius_m) {
    SnapResult res;
    res.checkins.counts.assign(n_places, 0);
    res.stats.total = raw.size();

    for (const auto& r : raw) {
        if (!r.pickup || !r.dropoff) {
            ++res.stats.dropped_by_reason["missing_coords"];
            continue;
        }
        auto o = index.nearest_within(*r.pickup, radius_m);
        auto d = index.nearest_within(*r.dropoff, radius_m);
        if (!o || !d) {
            ++res.stats.dropped_by_reason["no_place_in_range"];
            continue;
        }
        res.trips.push_back(Trip{o->id, d->id, r.pickup_time, r.dropoff_time});
        ++res.checkins.counts[d->id];
        ++res.stats.retained;
    }
    return res;
}

namespace {
constexpr char kTripMagic[12] = {'P', 'M', 'T', 'R', 'I', 'P', 'C', 'A', 'C', 'H', 'E', '\0'};
constexpr uint32_t kTripVersion = 1;
}  // namespace

void write_trip_cache(const std::string& path, const std::vector<Trip>& trips) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trip cache: " + path);
    out.write(kTripMagic, sizeof(kTripMagic));
    out.write(reinterpret_cast<const char*>(&kTripVersion), 4);
    for (const auto& t : trips) {
        out.write(reinterpret_cast<const char*>(&t.origin), 4);
        out.write(reinterpret_cast<const char*>(&t.dest), 4);
        out.write(reinterpret_cast<const char*>(&t.depart), 8);
        out.write(reinterpret_cast<const char*>(&t.arrive), 8);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Trip> read_trip_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trip cache: " + path);
    char magic[12];
    uint32_t version = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), 4);
    if (!in || std::memcmp(magic, kTripMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a trip cache: " + path);
    if (version != kTripVersion)
        throw std::runtime_error("unsupported trip cache version in " + path);

    std::vector<Trip> trips;
    while (true) {
        Trip t;
        in.read(reinterpret_cast<char*>(&t.origin), 4);
        if (in.gcount() == 0) break;
        in.read(reinterpret_cast<char*>(&t.dest), 4);
        in.read(reinterpret_cast<char*>(&t.depart), 8);
        in.read(reinterpret_cast<char*>(&t.arrive), 8);
        if (!in) throw std::runtime_error("truncated trip cache: " + path);
        trips.push_back(t);
    }
    return trips;
}

}  // namespace placemove
