#include "relayim/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace relayim {

namespace {

double ci95_half_width(double proportion, std::uint64_t trials) {
    return 1.96 * std::sqrt(proportion * (1.0 - proportion) / static_cast<double>(trials));
}

}  // namespace

MetricAccumulator::MetricAccumulator(int bits_per_block, int channel_uses_per_trial, bool cr_mode)
    : bits_per_block_(bits_per_block),
      channel_uses_per_trial_(channel_uses_per_trial),
      cr_mode_(cr_mode) {
    if (bits_per_block < 1 || channel_uses_per_trial < 1) {
        throw std::invalid_argument("accumulator needs positive bits per block and channel uses");
    }
}

void MetricAccumulator::update(const TrialOutcome& outcome) {
    if (outcome.channel_uses != channel_uses_per_trial_) {
        throw std::invalid_argument("outcome channel uses (" + std::to_string(outcome.channel_uses) +
                                    ") do not match this accumulator (" +
                                    std::to_string(channel_uses_per_trial_) + ")");
    }
    if (outcome.bits_sent != bits_per_block_) {
        throw std::invalid_argument("outcome bit count does not match this accumulator");
    }
    trials_ += 1;
    block_errors_ += outcome.block_error ? 1 : 0;
    bit_errors_ += static_cast<std::uint64_t>(outcome.bit_errors);
    bits_total_ += static_cast<std::uint64_t>(outcome.bits_sent);
    outages_ += outcome.outage ? 1 : 0;
    if (cr_mode_) {
        primary_bit_errors_ += static_cast<std::uint64_t>(outcome.primary_bit_errors);
        secondary_bit_errors_ += static_cast<std::uint64_t>(outcome.secondary_bit_errors);
        phase1_only_bit_errors_ += static_cast<std::uint64_t>(outcome.phase1_only_bit_errors);
        primary_bits_total_ += static_cast<std::uint64_t>(outcome.primary_bits_sent);
        secondary_bits_total_ += static_cast<std::uint64_t>(outcome.secondary_bits_sent);
    }
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
    if (other.bits_per_block_ != bits_per_block_ ||
        other.channel_uses_per_trial_ != channel_uses_per_trial_ || other.cr_mode_ != cr_mode_) {
        throw std::invalid_argument("cannot merge accumulators from different configurations");
    }
    trials_ += other.trials_;
    block_errors_ += other.block_errors_;
    bit_errors_ += other.bit_errors_;
    bits_total_ += other.bits_total_;
    outages_ += other.outages_;
    primary_bit_errors_ += other.primary_bit_errors_;
    primary_bits_total_ += other.primary_bits_total_;
    secondary_bit_errors_ += other.secondary_bit_errors_;
    secondary_bits_total_ += other.secondary_bits_total_;
    phase1_only_bit_errors_ += other.phase1_only_bit_errors_;
}

MetricSummary MetricAccumulator::summarize() const {
    if (trials_ == 0) {
        throw std::invalid_argument("cannot summarize an empty accumulator");
    }
    MetricSummary s;
    s.trials = trials_;
    s.bler = static_cast<double>(block_errors_) / static_cast<double>(trials_);
    s.ber = static_cast<double>(bit_errors_) / static_cast<double>(bits_total_);
    s.outage_prob = static_cast<double>(outages_) / static_cast<double>(trials_);
    s.bler_ci95 = ci95_half_width(s.bler, trials_);
    s.ber_ci95 = ci95_half_width(s.ber, trials_);
    s.outage_ci95 = ci95_half_width(s.outage_prob, trials_);
    s.throughput_bpcu = static_cast<double>(bits_per_block_) * (1.0 - s.bler) /
                        static_cast<double>(channel_uses_per_trial_);
    s.cr_mode = cr_mode_;
    if (cr_mode_ && primary_bits_total_ > 0 && secondary_bits_total_ > 0) {
        s.primary_ber =
            static_cast<double>(primary_bit_errors_) / static_cast<double>(primary_bits_total_);
        s.secondary_ber =
            static_cast<double>(secondary_bit_errors_) / static_cast<double>(secondary_bits_total_);
        s.phase1_primary_ber =
            static_cast<double>(phase1_only_bit_errors_) / static_cast<double>(primary_bits_total_);
    }
    return s;
}

MetricAccumulator merge(const MetricAccumulator& a, const MetricAccumulator& b) {
    MetricAccumulator out = a;
    out.merge(b);
    return out;
}

}  // namespace relayim
