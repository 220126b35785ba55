#include "relayim/im_modem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace relayim {

namespace {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return c;
}

bool is_power_of_two(int x) {
    return x > 0 && (x & (x - 1)) == 0;
}

}  // namespace

std::vector<int> SapTable::active_positions(int sap_index) const {
    if (sap_index < 0 || static_cast<std::size_t>(sap_index) >= patterns.size()) {
        throw std::invalid_argument("SAP index out of range");
    }
    std::vector<int> positions;
    positions.reserve(static_cast<std::size_t>(n_active));
    const std::uint32_t mask = patterns[static_cast<std::size_t>(sap_index)];
    for (int n = 0; n < n_subcarriers; ++n) {
        if (mask & (1u << n)) positions.push_back(n);
    }
    return positions;
}

SapTable build_sap_table(int n_subcarriers, int n_active) {
    if (n_subcarriers < 1 || n_subcarriers > 32 || n_active < 1 || n_active > n_subcarriers) {
        throw std::invalid_argument("SAP table requires 1 <= K <= N <= 32");
    }
    const std::uint64_t combos = binomial(n_subcarriers, n_active);
    const int index_bits = std::bit_width(combos) - 1;  // floor(log2 C(N, K))

    SapTable table;
    table.n_subcarriers = n_subcarriers;
    table.n_active = n_active;
    table.index_bits = index_bits;

    const std::uint64_t count = 1ull << index_bits;
    table.patterns.reserve(count);

    // K-subsets in lexicographic order of their sorted position tuples,
    // stopping after the first 2^p1.
    std::vector<int> positions(static_cast<std::size_t>(n_active));
    for (int k = 0; k < n_active; ++k) positions[static_cast<std::size_t>(k)] = k;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t mask = 0;
        for (int pos : positions) mask |= 1u << pos;
        table.patterns.push_back(mask);
        // advance to the next combination
        int j = n_active - 1;
        while (j >= 0 && positions[static_cast<std::size_t>(j)] == n_subcarriers - n_active + j) --j;
        if (j < 0) break;
        ++positions[static_cast<std::size_t>(j)];
        for (int l = j + 1; l < n_active; ++l) {
            positions[static_cast<std::size_t>(l)] = positions[static_cast<std::size_t>(l - 1)] + 1;
        }
    }
    return table;
}

PskConstellation make_psk(int order) {
    if (!is_power_of_two(order) || order < 2) {
        throw std::invalid_argument("PSK order must be a power of two >= 2");
    }
    PskConstellation psk;
    psk.order = order;
    psk.bits_per_symbol = std::bit_width(static_cast<unsigned>(order)) - 1;
    psk.points.resize(static_cast<std::size_t>(order));
    psk.labels.resize(static_cast<std::size_t>(order));
    psk.point_of_label.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        const double phase = 2.0 * std::numbers::pi * i / order;
        double re = std::cos(phase);
        double im = std::sin(phase);
        // snap the cardinal points so BPSK/QPSK constellations are exact
        if (std::abs(re) < 1e-12) re = 0.0;
        if (std::abs(im) < 1e-12) im = 0.0;
        if (std::abs(std::abs(re) - 1.0) < 1e-12) re = std::copysign(1.0, re);
        if (std::abs(std::abs(im) - 1.0) < 1e-12) im = std::copysign(1.0, im);
        psk.points[static_cast<std::size_t>(i)] = {re, im};
        const auto gray = static_cast<std::uint32_t>(i ^ (i >> 1));
        psk.labels[static_cast<std::size_t>(i)] = gray;
        psk.point_of_label[gray] = i;
    }
    return psk;
}

int bits_per_block(const SapTable& table, const PskConstellation& psk) {
    return table.index_bits + table.n_active * psk.bits_per_symbol;
}

ImBlock map_bits(const std::vector<std::uint8_t>& bits, const SapTable& table,
                 const PskConstellation& psk, double transmit_power) {
    const int expected = bits_per_block(table, psk);
    if (static_cast<int>(bits.size()) != expected) {
        throw std::invalid_argument("bit vector length must be " + std::to_string(expected) +
                                    ", got " + std::to_string(bits.size()));
    }
    if (transmit_power <= 0.0) {
        throw std::invalid_argument("transmit power must be positive");
    }

    ImBlock block;
    int cursor = 0;
    int sap_index = 0;
    for (int b = 0; b < table.index_bits; ++b) {
        sap_index = (sap_index << 1) | bits[static_cast<std::size_t>(cursor++)];
    }
    block.sap_index = sap_index;

    block.symbols.resize(static_cast<std::size_t>(table.n_active));
    for (int k = 0; k < table.n_active; ++k) {
        std::uint32_t label = 0;
        for (int b = 0; b < psk.bits_per_symbol; ++b) {
            label = (label << 1) | bits[static_cast<std::size_t>(cursor++)];
        }
        block.symbols[static_cast<std::size_t>(k)] = psk.point_of_label[label];
    }

    const double scale = std::sqrt(transmit_power / table.n_active);
    block.amplitudes.assign(static_cast<std::size_t>(table.n_subcarriers), cdouble{0.0, 0.0});
    const auto positions = table.active_positions(sap_index);
    for (int k = 0; k < table.n_active; ++k) {
        block.amplitudes[static_cast<std::size_t>(positions[static_cast<std::size_t>(k)])] =
            scale * psk.points[static_cast<std::size_t>(block.symbols[static_cast<std::size_t>(k)])];
    }
    return block;
}

std::vector<std::uint8_t> demap(int sap_index, const std::vector<int>& symbols,
                                const SapTable& table, const PskConstellation& psk) {
    if (sap_index < 0 || static_cast<std::size_t>(sap_index) >= table.pattern_count()) {
        throw std::invalid_argument("SAP index out of range");
    }
    if (static_cast<int>(symbols.size()) != table.n_active) {
        throw std::invalid_argument("expected one symbol per active subcarrier");
    }
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(bits_per_block(table, psk)));
    for (int b = table.index_bits - 1; b >= 0; --b) {
        bits.push_back(static_cast<std::uint8_t>((sap_index >> b) & 1));
    }
    for (int point : symbols) {
        if (point < 0 || point >= psk.order) {
            throw std::invalid_argument("symbol is not a constellation point");
        }
        const std::uint32_t label = psk.labels[static_cast<std::size_t>(point)];
        for (int b = psk.bits_per_symbol - 1; b >= 0; --b) {
            bits.push_back(static_cast<std::uint8_t>((label >> b) & 1));
        }
    }
    return bits;
}

DetectionResult ml_detect(const std::vector<cdouble>& received,
                          const std::vector<cdouble>& effective_gain,
                          const std::vector<double>& noise_var, const SapTable& table,
                          const PskConstellation& psk, double transmit_power) {
    const int n = table.n_subcarriers;
    const int k_active = table.n_active;
    const int m = psk.order;
    if (static_cast<int>(received.size()) != n || static_cast<int>(effective_gain.size()) != n ||
        static_cast<int>(noise_var.size()) != n) {
        throw std::invalid_argument("received, gain and noise vectors must have length N");
    }
    for (double v : noise_var) {
        if (!(v > 0.0)) throw std::invalid_argument("noise variance must be strictly positive");
    }
    if (k_active * psk.bits_per_symbol > 62) {
        throw std::invalid_argument("ML search space exceeds 2^62 symbol candidates");
    }

    const double symbol_power = transmit_power / k_active;
    const double scale = std::sqrt(symbol_power);

    // Candidate-independent part of the metric; added back at the end so the
    // returned value is the full whitened metric.
    double base = 0.0;
    for (int i = 0; i < n; ++i) {
        base += std::norm(received[static_cast<std::size_t>(i)]) / noise_var[static_cast<std::size_t>(i)];
    }

    // Per-subcarrier partial terms: activating subcarrier i with point p adds
    // power[i] - cross[i*M + p] to the metric.
    std::vector<double> power(static_cast<std::size_t>(n));
    std::vector<double> cross(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) {
        const cdouble yg = std::conj(received[static_cast<std::size_t>(i)]) *
                           effective_gain[static_cast<std::size_t>(i)];
        const double inv_v = 1.0 / noise_var[static_cast<std::size_t>(i)];
        power[static_cast<std::size_t>(i)] =
            symbol_power * std::norm(effective_gain[static_cast<std::size_t>(i)]) * inv_v;
        for (int p = 0; p < m; ++p) {
            cross[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(p)] =
                2.0 * scale * (yg * psk.points[static_cast<std::size_t>(p)]).real() * inv_v;
        }
    }

    const std::uint64_t symbol_candidates = 1ull << (k_active * psk.bits_per_symbol);
    const int bps = psk.bits_per_symbol;
    const std::uint32_t label_mask = static_cast<std::uint32_t>(m - 1);

    double best = std::numeric_limits<double>::infinity();
    int best_sap = 0;
    std::uint64_t best_labels = 0;
    std::vector<int> positions(static_cast<std::size_t>(k_active));

    for (std::size_t a = 0; a < table.patterns.size(); ++a) {
        const std::uint32_t mask = table.patterns[a];
        int idx = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) positions[static_cast<std::size_t>(idx++)] = i;
        }
        // Candidate word c concatenates the K symbol labels big-endian, so
        // ascending c enumerates label tuples in lexicographic order.
        for (std::uint64_t c = 0; c < symbol_candidates; ++c) {
            double metric = 0.0;
            for (int k = 0; k < k_active; ++k) {
                const auto label = static_cast<std::uint32_t>(
                    (c >> ((k_active - 1 - k) * bps)) & label_mask);
                const int point = psk.point_of_label[label];
                const auto pos = static_cast<std::size_t>(positions[static_cast<std::size_t>(k)]);
                metric += power[pos] - cross[pos * static_cast<std::size_t>(m) + static_cast<std::size_t>(point)];
            }
            if (metric < best) {
                best = metric;
                best_sap = static_cast<int>(a);
                best_labels = c;
            }
        }
    }

    DetectionResult result;
    result.sap_index = best_sap;
    result.symbols.resize(static_cast<std::size_t>(k_active));
    for (int k = 0; k < k_active; ++k) {
        const auto label = static_cast<std::uint32_t>(
            (best_labels >> ((k_active - 1 - k) * bps)) & label_mask);
        result.symbols[static_cast<std::size_t>(k)] = psk.point_of_label[label];
    }
    result.metric = base + best;
    return result;
}

}  // namespace relayim
