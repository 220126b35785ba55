#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relayim/channel.hpp"
#include "relayim/im_modem.hpp"
#include "relayim/rng.hpp"

namespace relayim {

enum class Structure { p2p, serial, parallel, cr_overlay };
enum class Protocol { df, af_variable, af_fixed };
enum class RsScheme { none, prs, bulk, per_subcarrier };

const char* to_string(Structure s);
const char* to_string(Protocol p);
const char* to_string(RsScheme r);

// Everything that defines one experiment: topology, forwarding protocol,
// relay-selection scheme and the modem/channel numerics. Power and noise are
// in normalized units (sigma^2 = 1 in the reference setup).
struct ScenarioConfig {
    Structure structure = Structure::p2p;
    Protocol protocol = Protocol::df;
    RsScheme rs_scheme = RsScheme::none;
    int hop_count = 1;    // L
    int relay_count = 1;  // T (relays per hop, parallel structure only)
    int n_subcarriers = 4;
    int n_active = 2;
    int psk_order = 2;
    double transmit_power = 1.0;  // Pt per group, identical at every transmitting node
    double path_loss_exponent = 2.0;
    double source_dest_distance = 10.0;
    double noise_var = 1.0;
    double outage_threshold = 1.0;

    // Throws std::invalid_argument on any inconsistent combination.
    void validate() const;
};

// Per-hop distances: L equal segments of d_SD/L for p2p/serial; two segments
// of d_SD/2 for the parallel and CR structures (relays at the midpoint).
std::vector<double> node_positions(const ScenarioConfig& config);

struct TrialOutcome {
    int bits_sent = 0;
    int bit_errors = 0;
    bool block_error = false;
    bool outage = false;
    int channel_uses = 0;
    // cr_overlay only: the two piggybacked streams, counted separately, plus
    // a paired phase-1-only baseline for the primary detection.
    int primary_bits_sent = 0;
    int secondary_bits_sent = 0;
    int primary_bit_errors = 0;
    int secondary_bit_errors = 0;
    bool primary_block_error = false;
    bool secondary_block_error = false;
    int phase1_only_bit_errors = 0;
};

// Raw per-trial quantities for independent recomputation in tests.
struct TrialTrace {
    std::uint32_t tx_mask = 0;  // transmitted SAP (phase-2 SAP for CR)
    std::vector<std::vector<cdouble>> hop_gains;         // serial/CR: per hop
    std::vector<std::vector<cdouble>> first_hop_gains;   // parallel: per relay
    std::vector<std::vector<cdouble>> second_hop_gains;  // parallel: per relay
    std::vector<int> relay_for_subcarrier;               // parallel
};

// Partial relay selection: best minimum first-hop subcarrier power,
// first-hop CSI only. Ties resolve to the lowest relay index.
int select_relay_prs(const std::vector<HopChannel>& first_hops);

// Bulk selection over end-to-end gains e2e[t][n] = min(|g1_t[n]|^2, |g2_t[n]|^2):
// one relay for all subcarriers, by the best worst-subcarrier gain.
int select_relay_bulk(const std::vector<std::vector<double>>& e2e_gains);

// Per-subcarrier selection: each subcarrier independently routed through its
// best end-to-end relay.
std::vector<int> select_relays_ps(const std::vector<std::vector<double>>& e2e_gains);

// AF amplification factor G^2 = relay_power_per_subcarrier / (signal + noise).
// Variable gain passes the instantaneous cascade signal power, fixed gain the
// statistical mean (Pt/K) d^-alpha.
double af_gain_sq(double relay_power_per_subcarrier, double input_signal_power,
                  double input_noise_var);

// One step of the exact variable-gain end-to-end SNR cascade:
// Gamma' = Gamma g / (Gamma + g + 1).
double af_e2e_snr_step(double snr_so_far, double hop_snr);

// Executes one end-to-end Monte Carlo trial for a fixed, validated config.
// Construction precomputes the SAP table, constellation and hop distances;
// run() is pure given the random stream, so a shared runner can serve many
// concurrent workers each owning a private stream.
class TrialRunner {
public:
    explicit TrialRunner(const ScenarioConfig& config);

    const ScenarioConfig& config() const { return cfg_; }
    const SapTable& sap_table() const { return table_; }
    const PskConstellation& constellation() const { return psk_; }

    int bits_per_trial() const { return bits_per_block(table_, psk_); }
    int channel_uses_per_trial() const;
    bool cr_mode() const { return cfg_.structure == Structure::cr_overlay; }

    TrialOutcome run(RandomStream& rng, TrialTrace* trace = nullptr) const;

private:
    TrialOutcome run_serial_df(RandomStream& rng, TrialTrace* trace) const;
    TrialOutcome run_serial_af(RandomStream& rng, TrialTrace* trace) const;
    TrialOutcome run_parallel(RandomStream& rng, TrialTrace* trace) const;
    TrialOutcome run_cr_overlay(RandomStream& rng, TrialTrace* trace) const;

    std::vector<cdouble> remodulate(int sap_index, const std::vector<int>& symbols) const;

    ScenarioConfig cfg_;
    SapTable table_;
    PskConstellation psk_;
    SapTable phase1_table_;  // CR phase 1: single pattern on the first K subcarriers
    std::vector<double> hop_distances_;
    std::vector<double> detector_noise_;  // noise_var floored for zero-noise configs
};

}  // namespace relayim
