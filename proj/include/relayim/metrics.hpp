#pragma once

#include <cstdint>

#include "relayim/relaying.hpp"

namespace relayim {

// Point estimates for one configuration at one transmit power.
struct MetricSummary {
    std::uint64_t trials = 0;
    double bler = 0.0;
    double bler_ci95 = 0.0;
    double ber = 0.0;
    double ber_ci95 = 0.0;
    double outage_prob = 0.0;
    double outage_ci95 = 0.0;
    double throughput_bpcu = 0.0;
    bool cr_mode = false;
    double primary_ber = 0.0;
    double secondary_ber = 0.0;
    double phase1_primary_ber = 0.0;  // paired single-phase baseline (CR only)
};

// Streaming integer counters over trial outcomes. Integer-only state makes
// the parallel merge exact: any merge tree over the same outcomes yields
// bit-identical summaries.
class MetricAccumulator {
public:
    MetricAccumulator(int bits_per_block, int channel_uses_per_trial, bool cr_mode = false);

    void update(const TrialOutcome& outcome);
    void merge(const MetricAccumulator& other);
    MetricSummary summarize() const;

    std::uint64_t trials() const { return trials_; }
    std::uint64_t block_errors() const { return block_errors_; }
    std::uint64_t bit_errors() const { return bit_errors_; }
    std::uint64_t bits_total() const { return bits_total_; }
    std::uint64_t outages() const { return outages_; }
    int bits_per_block() const { return bits_per_block_; }
    int channel_uses_per_trial() const { return channel_uses_per_trial_; }
    bool cr_mode() const { return cr_mode_; }

private:
    int bits_per_block_;
    int channel_uses_per_trial_;
    bool cr_mode_;
    std::uint64_t trials_ = 0;
    std::uint64_t block_errors_ = 0;
    std::uint64_t bit_errors_ = 0;
    std::uint64_t bits_total_ = 0;
    std::uint64_t outages_ = 0;
    std::uint64_t primary_bit_errors_ = 0;
    std::uint64_t primary_bits_total_ = 0;
    std::uint64_t secondary_bit_errors_ = 0;
    std::uint64_t secondary_bits_total_ = 0;
    std::uint64_t phase1_only_bit_errors_ = 0;
};

MetricAccumulator merge(const MetricAccumulator& a, const MetricAccumulator& b);

}  // namespace relayim
