#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sugar/covariance.hpp"
#include "sugar/forward_model.hpp"

namespace sugar {

// Lineage written into every output file.
struct Provenance {
    std::string build_id;
    std::uint64_t seed = 0;
    std::string config_hash;
};

std::string build_id();
// FNV-1a 64 of the canonical config text, as 16 hex digits.
std::string config_hash(const std::string& canonical);

// 16-bit binary PGM; values are rounded and must lie in [0, 65535].
void write_pgm16(const std::string& path, const ImageField& f, const Provenance& prov);
ImageField read_pgm16(const std::string& path);

// Raw little-endian float64 planes (row-major, plane after plane) plus `path + ".json"` sidecar.
struct RawArray {
    int rows = 0, cols = 0;
    std::vector<ImageField> planes;
    std::string sidecar_json;  // full sidecar text
};

void write_raw(const std::string& path, const std::vector<ImageField>& planes, const Provenance& prov,
               const std::string& kind, int j1 = 0, int j2 = 0);
RawArray read_raw(const std::string& path);

void write_field(const std::string& path, const ImageField& f, const Provenance& prov);
ImageField read_field(const std::string& path);
void write_leaders(const std::string& path, const LeaderStack& l, const Provenance& prov);
LeaderStack read_leaders(const std::string& path);
void write_attributes(const std::string& path, const AttributePair& x, const Provenance& prov);
AttributePair read_attributes(const std::string& path);

// Covariance file layout:
//   8 bytes  magic "SUGARCOV"
//   8 bytes  little-endian uint64 header length L
//   L bytes  JSON header: kind, j1, j2, rows, cols, kernel radii, provenance
//   J*J      float64 entries of C, row-major
//   for a in 0..J-1, b in 0..J-1: kernel (a, b) taps, row-major,
//            (2*radius_rows+1) x (2*radius_cols+1) float64 each
void save_covariance(const std::string& path, const CovarianceModel& m, const Provenance& prov, int rows, int cols);
CovarianceModel load_covariance(const std::string& path);

// CSV with '#'-prefixed provenance lines before the header.
void write_csv(const std::string& path, const Provenance& prov, const std::string& header,
               const std::vector<std::string>& rows);

}  // namespace sugar
