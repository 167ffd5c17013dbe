#include "sugar/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sugar/errors.hpp"

#ifndef SUGAR_BUILD_ID
#define SUGAR_BUILD_ID "unknown"
#endif

namespace sugar {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "raw I/O assumes a little-endian host");

std::string build_id() { return SUGAR_BUILD_ID; }

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json provenance_json(const Provenance& p) {
    return json{{"build_id", p.build_id}, {"seed", p.seed}, {"config_hash", p.config_hash}};
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for reading");
    return is;
}

void write_doubles(std::ostream& os, const double* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), std::streamsize(n * sizeof(double)));
}

void read_doubles(std::istream& is, double* p, std::size_t n, const std::string& path) {
    is.read(reinterpret_cast<char*>(p), std::streamsize(n * sizeof(double)));
    if (!is) throw DataError("'" + path + "' is truncated");
}

std::string next_token(std::istream& is) {
    std::string tok;
    char c;
    while (is.get(c)) {
        if (c == '#') {
            std::string rest;
            std::getline(is, rest);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

}  // namespace

void write_pgm16(const std::string& path, const ImageField& f, const Provenance& prov) {
    auto os = open_out(path);
    os << "P5\n# build_id " << prov.build_id << "\n# seed " << prov.seed << "\n# config_hash " << prov.config_hash
       << "\n"
       << f.cols() << ' ' << f.rows() << "\n65535\n";
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double v = std::round(f.data()[i]);
        if (!(v >= 0.0 && v <= 65535.0)) throw DataError("PGM value out of 16-bit range");
        const auto u = static_cast<std::uint16_t>(v);
        const char bytes[2] = {char(u >> 8), char(u & 0xff)};
        os.write(bytes, 2);
    }
}

ImageField read_pgm16(const std::string& path) {
    auto is = open_in(path);
    if (next_token(is) != "P5") throw DataError("'" + path + "' is not a binary PGM");
    const int cols = std::stoi(next_token(is));
    const int rows = std::stoi(next_token(is));
    const int maxval = std::stoi(next_token(is));
    if (rows <= 0 || cols <= 0 || maxval <= 0 || maxval > 65535) throw DataError("'" + path + "': bad PGM header");
    ImageField f(rows, cols);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (maxval > 255) {
            unsigned char b[2];
            is.read(reinterpret_cast<char*>(b), 2);
            f.data()[i] = double((b[0] << 8) | b[1]);
        } else {
            unsigned char b;
            is.read(reinterpret_cast<char*>(&b), 1);
            f.data()[i] = double(b);
        }
        if (!is) throw DataError("'" + path + "' is truncated");
    }
    return f;
}

void write_raw(const std::string& path, const std::vector<ImageField>& planes, const Provenance& prov,
               const std::string& kind, int j1, int j2) {
    if (planes.empty()) throw DataError("write_raw: nothing to write");
    auto os = open_out(path);
    for (const auto& p : planes) write_doubles(os, p.data(), std::size_t(p.size()));
    json side{{"format", "float64-le"},
              {"kind", kind},
              {"rows", planes.front().rows()},
              {"cols", planes.front().cols()},
              {"planes", planes.size()},
              {"order", "row-major, plane after plane"},
              {"provenance", provenance_json(prov)}};
    if (j2 > 0) {
        side["j1"] = j1;
        side["j2"] = j2;
    }
    auto ss = open_out(path + ".json");
    ss << side.dump(2) << "\n";
}

RawArray read_raw(const std::string& path) {
    auto ss = open_in(path + ".json");
    std::stringstream buf;
    buf << ss.rdbuf();
    json side;
    try {
        side = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw DataError("'" + path + ".json': " + e.what());
    }
    RawArray r;
    r.sidecar_json = buf.str();
    r.rows = side.at("rows").get<int>();
    r.cols = side.at("cols").get<int>();
    const int n = side.at("planes").get<int>();
    auto is = open_in(path);
    for (int k = 0; k < n; ++k) {
        ImageField p(r.rows, r.cols);
        read_doubles(is, p.data(), std::size_t(p.size()), path);
        r.planes.push_back(std::move(p));
    }
    return r;
}

void write_field(const std::string& path, const ImageField& f, const Provenance& prov) {
    write_raw(path, {f}, prov, "field");
}

ImageField read_field(const std::string& path) {
    RawArray r = read_raw(path);
    if (r.planes.size() != 1) throw DataError("'" + path + "' is not a single field");
    return r.planes.front();
}

void write_leaders(const std::string& path, const LeaderStack& l, const Provenance& prov) {
    write_raw(path, l.planes, prov, "log-leaders", l.scales.j1(), l.scales.j2());
}

LeaderStack read_leaders(const std::string& path) {
    RawArray r = read_raw(path);
    json side = json::parse(r.sidecar_json);
    if (!side.contains("j1") || !side.contains("j2")) throw DataError("'" + path + "' has no scale range");
    return LeaderStack(ScaleRange(side["j1"].get<int>(), side["j2"].get<int>()), std::move(r.planes));
}

void write_attributes(const std::string& path, const AttributePair& x, const Provenance& prov) {
    write_raw(path, {x.h, x.v}, prov, "attributes(h,v)");
}

AttributePair read_attributes(const std::string& path) {
    RawArray r = read_raw(path);
    if (r.planes.size() != 2) throw DataError("'" + path + "' is not an attribute pair");
    return AttributePair(r.planes[0], r.planes[1]);
}

void save_covariance(const std::string& path, const CovarianceModel& m, const Provenance& prov, int rows, int cols) {
    const int J = m.size();
    json radii = json::array();
    for (int a = 0; a < J; ++a)
        for (int b = 0; b < J; ++b) radii.push_back({m.kernel(a, b).radius_rows, m.kernel(a, b).radius_cols});
    json header{{"kind", to_string(m.kind())},
                {"j1", m.scales().j1()},
                {"j2", m.scales().j2()},
                {"rows", rows},
                {"cols", cols},
                {"kernel_radii", radii},
                {"block_order", "C row-major, then kernels (a,b) for a, b in 0..J-1, taps row-major"},
                {"provenance", provenance_json(prov)}};
    const std::string text = header.dump();
    auto os = open_out(path);
    os.write("SUGARCOV", 8);
    const std::uint64_t len = text.size();
    os.write(reinterpret_cast<const char*>(&len), 8);
    os.write(text.data(), std::streamsize(text.size()));
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = m.C();
    write_doubles(os, c.data(), std::size_t(c.size()));
    for (int a = 0; a < J; ++a)
        for (int b = 0; b < J; ++b) write_doubles(os, m.kernel(a, b).taps.data(), std::size_t(m.kernel(a, b).taps.size()));
}

CovarianceModel load_covariance(const std::string& path) {
    auto is = open_in(path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "SUGARCOV", 8) != 0) throw DataError("'" + path + "' is not a covariance file");
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), 8);
    if (!is || len > (1u << 24)) throw DataError("'" + path + "': bad header length");
    std::string text(len, '\0');
    is.read(text.data(), std::streamsize(len));
    json header;
    try {
        header = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("'" + path + "': " + e.what());
    }
    const ScaleRange s(header.at("j1").get<int>(), header.at("j2").get<int>());
    const int J = s.size();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c(J, J);
    read_doubles(is, c.data(), std::size_t(c.size()), path);
    std::vector<LagKernel> ks;
    const json& radii = header.at("kernel_radii");
    for (int i = 0; i < J * J; ++i) {
        LagKernel k = LagKernel::zeros(radii.at(i).at(0).get<int>(), radii.at(i).at(1).get<int>());
        read_doubles(is, k.taps.data(), std::size_t(k.taps.size()), path);
        ks.push_back(std::move(k));
    }
    CovarianceModel m(parse_covariance_kind(header.at("kind").get<std::string>()), s);
    for (int a = 0; a < J; ++a)
        for (int b = a; b < J; ++b) m.set_pair(a, b, c(a, b), ks[std::size_t(a * J + b)]);
    m.validate();
    return m;
}

void write_csv(const std::string& path, const Provenance& prov, const std::string& header,
               const std::vector<std::string>& rows) {
    auto os = open_out(path);
    os << "# build_id=" << prov.build_id << "\n# seed=" << prov.seed << "\n# config_hash=" << prov.config_hash << "\n"
       << header << "\n";
    for (const auto& r : rows) os << r << "\n";
}

}  // namespace sugar
