#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace relayim {

using cdouble = std::complex<double>;

// Look-up table of legitimate subcarrier activation patterns for one group of
// N subcarriers with K active. Holds the lexicographically first 2^p1
// K-subsets of [0, N), p1 = floor(log2(C(N, K))).
struct SapTable {
    int n_subcarriers = 0;  // N
    int n_active = 0;       // K
    int index_bits = 0;     // p1
    std::vector<std::uint32_t> patterns;  // bit n set <=> subcarrier n active

    std::size_t pattern_count() const { return patterns.size(); }

    // Ascending active positions of pattern `sap_index`.
    std::vector<int> active_positions(int sap_index) const;
};

SapTable build_sap_table(int n_subcarriers, int n_active);

// M-PSK constellation, points counter-clockwise from phase 0, reflected Gray
// bit labels.
struct PskConstellation {
    int order = 0;            // M, a power of two
    int bits_per_symbol = 0;  // log2(M)
    std::vector<cdouble> points;
    std::vector<std::uint32_t> labels;  // labels[i] = Gray label of points[i]
    std::vector<int> point_of_label;    // inverse of labels
};

PskConstellation make_psk(int order);

// One frequency-domain OFDM-IM group. `symbols` indexes constellation points
// per active subcarrier in ascending position order; `amplitudes` is the
// length-N transmit vector with power Pt/K on each active subcarrier.
struct ImBlock {
    int sap_index = 0;
    std::vector<int> symbols;
    std::vector<cdouble> amplitudes;
};

// Bits carried by one group: p1 + K log2(M).
int bits_per_block(const SapTable& table, const PskConstellation& psk);

// Maps p1 + K log2(M) bits onto a group. The first p1 bits select the SAP
// (big-endian), the rest fill the K symbols in ascending position order.
ImBlock map_bits(const std::vector<std::uint8_t>& bits, const SapTable& table,
                 const PskConstellation& psk, double transmit_power);

// Exact inverse of map_bits.
std::vector<std::uint8_t> demap(int sap_index, const std::vector<int>& symbols,
                                const SapTable& table, const PskConstellation& psk);

struct DetectionResult {
    int sap_index = 0;
    std::vector<int> symbols;
    double metric = 0.0;  // whitened metric of the winning candidate
};

// Joint maximum-likelihood detection: minimizes
//   sum_n |y[n] - g_eff[n] x[n]|^2 / noise_var[n]
// over all 2^p1 * M^K legitimate blocks. Per-subcarrier noise variances make
// the same detector serve DF hops (white noise) and AF cascades (colored
// noise). Ties resolve to the lowest SAP index, then the lexicographically
// smallest symbol labels.
DetectionResult ml_detect(const std::vector<cdouble>& received,
                          const std::vector<cdouble>& effective_gain,
                          const std::vector<double>& noise_var, const SapTable& table,
                          const PskConstellation& psk, double transmit_power);

}  // namespace relayim
