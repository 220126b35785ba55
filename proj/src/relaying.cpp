#include "relayim/relaying.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relayim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_power_of_two(int x) {
    return x > 0 && (x & (x - 1)) == 0;
}

int count_bit_errors(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    int errors = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        errors += a[i] != b[i];
    }
    return errors;
}

}  // namespace

const char* to_string(Structure s) {
    switch (s) {
        case Structure::p2p: return "p2p";
        case Structure::serial: return "serial";
        case Structure::parallel: return "parallel";
        case Structure::cr_overlay: return "cr";
    }
    return "?";
}

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::df: return "df";
        case Protocol::af_variable: return "af-vg";
        case Protocol::af_fixed: return "af-fg";
    }
    return "?";
}

const char* to_string(RsScheme r) {
    switch (r) {
        case RsScheme::none: return "none";
        case RsScheme::prs: return "prs";
        case RsScheme::bulk: return "bulk";
        case RsScheme::per_subcarrier: return "ps";
    }
    return "?";
}

void ScenarioConfig::validate() const {
    if (n_subcarriers < 1 || n_subcarriers > 32) {
        throw std::invalid_argument("subcarrier count must be in [1, 32]");
    }
    if (n_active < 1 || n_active > n_subcarriers) {
        throw std::invalid_argument("active count must be in [1, N]");
    }
    if (!is_power_of_two(psk_order) || psk_order < 2) {
        throw std::invalid_argument("PSK order must be a power of two >= 2");
    }
    if (!(transmit_power > 0.0)) throw std::invalid_argument("transmit power must be positive");
    if (!(source_dest_distance > 0.0)) {
        throw std::invalid_argument("source-destination distance must be positive");
    }
    if (path_loss_exponent < 0.0) {
        throw std::invalid_argument("path loss exponent must be non-negative");
    }
    if (noise_var < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    if (!(outage_threshold > 0.0)) throw std::invalid_argument("outage threshold must be positive");
    if (hop_count < 1) throw std::invalid_argument("hop count must be >= 1");
    if (relay_count < 1) throw std::invalid_argument("relay count must be >= 1");
    if (rs_scheme != RsScheme::none && structure != Structure::parallel) {
        throw std::invalid_argument("relay selection requires the parallel structure");
    }

    switch (structure) {
        case Structure::p2p:
            if (hop_count != 1) throw std::invalid_argument("p2p requires L = 1");
            if (protocol != Protocol::df) {
                throw std::invalid_argument("p2p has no relay to amplify; use df");
            }
            break;
        case Structure::serial:
            if (hop_count < 2) throw std::invalid_argument("serial requires L >= 2");
            break;
        case Structure::parallel:
            if (hop_count != 2) throw std::invalid_argument("parallel requires L = 2");
            if (protocol != Protocol::df) {
                throw std::invalid_argument("parallel relaying is decode-and-forward only");
            }
            if (rs_scheme == RsScheme::none && relay_count != 1) {
                throw std::invalid_argument("parallel with T > 1 requires a relay-selection scheme");
            }
            break;
        case Structure::cr_overlay:
            if (hop_count != 2) throw std::invalid_argument("cr requires L = 2");
            if (relay_count != 1) throw std::invalid_argument("cr uses a single secondary transmitter");
            if (protocol != Protocol::df) {
                throw std::invalid_argument("the secondary transmitter must decode to re-modulate; use df");
            }
            if (n_active >= n_subcarriers) {
                throw std::invalid_argument("cr needs K < N so the index domain carries bits");
            }
            break;
    }
}

std::vector<double> node_positions(const ScenarioConfig& config) {
    config.validate();
    if (config.structure == Structure::parallel || config.structure == Structure::cr_overlay) {
        const double half = config.source_dest_distance / 2.0;
        return {half, half};
    }
    return std::vector<double>(static_cast<std::size_t>(config.hop_count),
                               config.source_dest_distance / config.hop_count);
}

int select_relay_prs(const std::vector<HopChannel>& first_hops) {
    if (first_hops.empty()) throw std::invalid_argument("need at least one relay");
    int best_relay = 0;
    double best_gain = -kInf;
    for (std::size_t t = 0; t < first_hops.size(); ++t) {
        double worst = kInf;
        for (const auto& g : first_hops[t].gains) worst = std::min(worst, std::norm(g));
        if (worst > best_gain) {
            best_gain = worst;
            best_relay = static_cast<int>(t);
        }
    }
    return best_relay;
}

int select_relay_bulk(const std::vector<std::vector<double>>& e2e_gains) {
    if (e2e_gains.empty()) throw std::invalid_argument("need at least one relay");
    int best_relay = 0;
    double best_gain = -kInf;
    for (std::size_t t = 0; t < e2e_gains.size(); ++t) {
        double worst = kInf;
        for (double g : e2e_gains[t]) worst = std::min(worst, g);
        if (worst > best_gain) {
            best_gain = worst;
            best_relay = static_cast<int>(t);
        }
    }
    return best_relay;
}

std::vector<int> select_relays_ps(const std::vector<std::vector<double>>& e2e_gains) {
    if (e2e_gains.empty()) throw std::invalid_argument("need at least one relay");
    const std::size_t n = e2e_gains.front().size();
    std::vector<int> chosen(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = e2e_gains[0][i];
        for (std::size_t t = 1; t < e2e_gains.size(); ++t) {
            if (e2e_gains[t][i] > best) {
                best = e2e_gains[t][i];
                chosen[i] = static_cast<int>(t);
            }
        }
    }
    return chosen;
}

double af_gain_sq(double relay_power_per_subcarrier, double input_signal_power,
                  double input_noise_var) {
    return relay_power_per_subcarrier / (input_signal_power + input_noise_var);
}

double af_e2e_snr_step(double snr_so_far, double hop_snr) {
    return snr_so_far * hop_snr / (snr_so_far + hop_snr + 1.0);
}

TrialRunner::TrialRunner(const ScenarioConfig& config) : cfg_(config) {
    cfg_.validate();
    table_ = build_sap_table(cfg_.n_subcarriers, cfg_.n_active);
    psk_ = make_psk(cfg_.psk_order);
    hop_distances_ = node_positions(cfg_);
    if (cr_mode()) {
        phase1_table_.n_subcarriers = cfg_.n_subcarriers;
        phase1_table_.n_active = cfg_.n_active;
        phase1_table_.index_bits = 0;
        phase1_table_.patterns = {(1u << cfg_.n_active) - 1u};
    }
    // zero-variance (noiseless) configs fall back to uniform whitening, which
    // leaves the argmin unchanged when there is no noise to whiten
    detector_noise_.assign(static_cast<std::size_t>(cfg_.n_subcarriers),
                           cfg_.noise_var > 0.0 ? cfg_.noise_var : 1.0);
}

int TrialRunner::channel_uses_per_trial() const {
    if (cfg_.structure == Structure::parallel || cfg_.structure == Structure::cr_overlay) {
        return 2 * cfg_.n_subcarriers;
    }
    return cfg_.hop_count * cfg_.n_subcarriers;
}

std::vector<cdouble> TrialRunner::remodulate(int sap_index, const std::vector<int>& symbols) const {
    std::vector<cdouble> amplitudes(static_cast<std::size_t>(cfg_.n_subcarriers), cdouble{0.0, 0.0});
    const double scale = std::sqrt(cfg_.transmit_power / cfg_.n_active);
    const auto positions = table_.active_positions(sap_index);
    for (std::size_t k = 0; k < positions.size(); ++k) {
        amplitudes[static_cast<std::size_t>(positions[k])] =
            scale * psk_.points[static_cast<std::size_t>(symbols[k])];
    }
    return amplitudes;
}

TrialOutcome TrialRunner::run(RandomStream& rng, TrialTrace* trace) const {
    switch (cfg_.structure) {
        case Structure::p2p:
        case Structure::serial:
            if (cfg_.protocol == Protocol::df) return run_serial_df(rng, trace);
            return run_serial_af(rng, trace);
        case Structure::parallel:
            return run_parallel(rng, trace);
        case Structure::cr_overlay:
            return run_cr_overlay(rng, trace);
    }
    throw std::logic_error("unreachable structure");
}

TrialOutcome TrialRunner::run_serial_df(RandomStream& rng, TrialTrace* trace) const {
    const int n = cfg_.n_subcarriers;
    const int hops = cfg_.hop_count;
    const double sigma2 = cfg_.noise_var;
    const double symbol_power = cfg_.transmit_power / cfg_.n_active;
    const NoiseModel noise{sigma2};

    const auto tx_bits = random_bits(rng, bits_per_trial());
    ImBlock block = map_bits(tx_bits, table_, psk_, cfg_.transmit_power);
    const auto tx_positions = table_.active_positions(block.sap_index);
    if (trace) trace->tx_mask = table_.patterns[static_cast<std::size_t>(block.sap_index)];

    // Each hop: transmit, jointly detect, and (at intermediate relays)
    // regenerate from the local decision, so wrong decisions propagate.
    double min_snr = kInf;
    std::vector<cdouble> current = std::move(block.amplitudes);
    DetectionResult det;
    for (int l = 0; l < hops; ++l) {
        const HopChannel hop = sample_hop(rng, n, hop_distances_[static_cast<std::size_t>(l)],
                                          cfg_.path_loss_exponent);
        if (trace) trace->hop_gains.push_back(hop.gains);
        const auto received = transmit(current, hop, noise, rng);
        det = ml_detect(received, hop.gains, detector_noise_, table_, psk_, cfg_.transmit_power);
        if (sigma2 > 0.0) {
            for (int pos : tx_positions) {
                min_snr = std::min(min_snr,
                                   symbol_power * std::norm(hop.gains[static_cast<std::size_t>(pos)]) / sigma2);
            }
        }
        if (l + 1 < hops) current = remodulate(det.sap_index, det.symbols);
    }

    const auto rx_bits = demap(det.sap_index, det.symbols, table_, psk_);
    TrialOutcome out;
    out.bits_sent = bits_per_trial();
    out.bit_errors = count_bit_errors(tx_bits, rx_bits);
    out.block_error = out.bit_errors > 0;
    out.outage = min_snr < cfg_.outage_threshold;
    out.channel_uses = channel_uses_per_trial();
    return out;
}

TrialOutcome TrialRunner::run_serial_af(RandomStream& rng, TrialTrace* trace) const {
    const int n = cfg_.n_subcarriers;
    const int hops = cfg_.hop_count;
    const double sigma2 = cfg_.noise_var;
    const double alpha = cfg_.path_loss_exponent;
    const double symbol_power = cfg_.transmit_power / cfg_.n_active;
    // A relay cannot identify the active set without decoding, so it spreads
    // its budget over all N subcarriers.
    const double relay_power = cfg_.transmit_power / n;
    const bool fixed_gain = cfg_.protocol == Protocol::af_fixed;
    const NoiseModel noise{sigma2};

    const auto tx_bits = random_bits(rng, bits_per_trial());
    ImBlock block = map_bits(tx_bits, table_, psk_, cfg_.transmit_power);
    const auto tx_positions = table_.active_positions(block.sap_index);
    if (trace) trace->tx_mask = table_.patterns[static_cast<std::size_t>(block.sap_index)];

    HopChannel hop = sample_hop(rng, n, hop_distances_[0], alpha);
    if (trace) trace->hop_gains.push_back(hop.gains);
    auto received = transmit(block.amplitudes, hop, noise, rng);

    std::vector<cdouble> cascade = hop.gains;   // source-to-here signal coefficient
    std::vector<double> noise_acc(static_cast<std::size_t>(n), sigma2);
    std::vector<double> e2e_snr(static_cast<std::size_t>(n), kInf);
    if (sigma2 > 0.0) {
        for (int i = 0; i < n; ++i) {
            e2e_snr[static_cast<std::size_t>(i)] =
                symbol_power * std::norm(cascade[static_cast<std::size_t>(i)]) / sigma2;
        }
    }

    for (int l = 1; l < hops; ++l) {
        // statistical mean received power at this relay, used by fixed gain
        const double mean_signal =
            symbol_power * std::pow(hop_distances_[static_cast<std::size_t>(l - 1)], -alpha);
        std::vector<double> gain_sq(static_cast<std::size_t>(n));
        std::vector<cdouble> amplified(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            const double signal = fixed_gain ? mean_signal : symbol_power * std::norm(cascade[s]);
            const double nv = fixed_gain ? sigma2 : noise_acc[s];
            gain_sq[s] = af_gain_sq(relay_power, signal, nv);
            amplified[s] = std::sqrt(gain_sq[s]) * received[s];
        }
        hop = sample_hop(rng, n, hop_distances_[static_cast<std::size_t>(l)], alpha);
        if (trace) trace->hop_gains.push_back(hop.gains);
        received = transmit(amplified, hop, noise, rng);
        for (int i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            const double hop_gain_sq = std::norm(hop.gains[s]);
            cascade[s] *= std::sqrt(gain_sq[s]) * hop.gains[s];
            noise_acc[s] = sigma2 + hop_gain_sq * gain_sq[s] * noise_acc[s];
            if (sigma2 > 0.0) {
                e2e_snr[s] = af_e2e_snr_step(e2e_snr[s], relay_power * hop_gain_sq / sigma2);
            }
        }
    }

    std::vector<double> det_noise(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        det_noise[s] = noise_acc[s] > 0.0 ? noise_acc[s] : 1.0;
    }
    const DetectionResult det =
        ml_detect(received, cascade, det_noise, table_, psk_, cfg_.transmit_power);
    const auto rx_bits = demap(det.sap_index, det.symbols, table_, psk_);

    double min_snr = kInf;
    for (int pos : tx_positions) {
        min_snr = std::min(min_snr, e2e_snr[static_cast<std::size_t>(pos)]);
    }

    TrialOutcome out;
    out.bits_sent = bits_per_trial();
    out.bit_errors = count_bit_errors(tx_bits, rx_bits);
    out.block_error = out.bit_errors > 0;
    out.outage = min_snr < cfg_.outage_threshold;
    out.channel_uses = channel_uses_per_trial();
    return out;
}

TrialOutcome TrialRunner::run_parallel(RandomStream& rng, TrialTrace* trace) const {
    const int n = cfg_.n_subcarriers;
    const int relays = cfg_.relay_count;
    const double sigma2 = cfg_.noise_var;
    const double symbol_power = cfg_.transmit_power / cfg_.n_active;
    const NoiseModel noise{sigma2};

    const auto tx_bits = random_bits(rng, bits_per_trial());
    ImBlock block = map_bits(tx_bits, table_, psk_, cfg_.transmit_power);
    const auto tx_positions = table_.active_positions(block.sap_index);

    std::vector<HopChannel> first(static_cast<std::size_t>(relays));
    std::vector<HopChannel> second(static_cast<std::size_t>(relays));
    for (auto& hop : first) hop = sample_hop(rng, n, hop_distances_[0], cfg_.path_loss_exponent);
    for (auto& hop : second) hop = sample_hop(rng, n, hop_distances_[1], cfg_.path_loss_exponent);

    std::vector<int> relay_for(static_cast<std::size_t>(n), 0);
    if (cfg_.rs_scheme == RsScheme::prs) {
        relay_for.assign(static_cast<std::size_t>(n), select_relay_prs(first));
    } else if (cfg_.rs_scheme == RsScheme::bulk || cfg_.rs_scheme == RsScheme::per_subcarrier) {
        std::vector<std::vector<double>> e2e(static_cast<std::size_t>(relays),
                                             std::vector<double>(static_cast<std::size_t>(n)));
        for (int t = 0; t < relays; ++t) {
            for (int i = 0; i < n; ++i) {
                e2e[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] =
                    std::min(std::norm(first[static_cast<std::size_t>(t)].gains[static_cast<std::size_t>(i)]),
                             std::norm(second[static_cast<std::size_t>(t)].gains[static_cast<std::size_t>(i)]));
            }
        }
        if (cfg_.rs_scheme == RsScheme::bulk) {
            relay_for.assign(static_cast<std::size_t>(n), select_relay_bulk(e2e));
        } else {
            relay_for = select_relays_ps(e2e);
        }
    }

    // Every relay that serves at least one subcarrier decodes the whole group
    // from its own first-hop observation and regenerates it; decode errors at
    // one relay corrupt exactly the subcarriers it is selected for.
    std::vector<std::vector<cdouble>> forwarded(static_cast<std::size_t>(relays));
    for (int t = 0; t < relays; ++t) {
        if (std::find(relay_for.begin(), relay_for.end(), t) == relay_for.end()) continue;
        const auto received =
            transmit(block.amplitudes, first[static_cast<std::size_t>(t)], noise, rng);
        const DetectionResult det = ml_detect(received, first[static_cast<std::size_t>(t)].gains,
                                              detector_noise_, table_, psk_, cfg_.transmit_power);
        forwarded[static_cast<std::size_t>(t)] = remodulate(det.sap_index, det.symbols);
    }

    std::vector<cdouble> composite(static_cast<std::size_t>(n));
    std::vector<cdouble> effective_gain(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const auto r = static_cast<std::size_t>(relay_for[s]);
        effective_gain[s] = second[r].gains[s];
        composite[s] = effective_gain[s] * forwarded[r][s] + rng.next_cgauss(sigma2);
    }
    const DetectionResult det =
        ml_detect(composite, effective_gain, detector_noise_, table_, psk_, cfg_.transmit_power);
    const auto rx_bits = demap(det.sap_index, det.symbols, table_, psk_);

    double min_snr = kInf;
    if (sigma2 > 0.0) {
        for (int pos : tx_positions) {
            const auto s = static_cast<std::size_t>(pos);
            const auto r = static_cast<std::size_t>(relay_for[s]);
            const double snr1 = symbol_power * std::norm(first[r].gains[s]) / sigma2;
            const double snr2 = symbol_power * std::norm(second[r].gains[s]) / sigma2;
            min_snr = std::min(min_snr, std::min(snr1, snr2));
        }
    }

    if (trace) {
        trace->tx_mask = table_.patterns[static_cast<std::size_t>(block.sap_index)];
        trace->relay_for_subcarrier = relay_for;
        for (const auto& hop : first) trace->first_hop_gains.push_back(hop.gains);
        for (const auto& hop : second) trace->second_hop_gains.push_back(hop.gains);
    }

    TrialOutcome out;
    out.bits_sent = bits_per_trial();
    out.bit_errors = count_bit_errors(tx_bits, rx_bits);
    out.block_error = out.bit_errors > 0;
    out.outage = min_snr < cfg_.outage_threshold;
    out.channel_uses = channel_uses_per_trial();
    return out;
}

TrialOutcome TrialRunner::run_cr_overlay(RandomStream& rng, TrialTrace* trace) const {
    const int n = cfg_.n_subcarriers;
    const int k_active = cfg_.n_active;
    const int m = psk_.order;
    const int bps = psk_.bits_per_symbol;
    const int primary_bit_count = k_active * bps;
    const int secondary_bit_count = table_.index_bits;
    const double sigma2 = cfg_.noise_var;
    const double symbol_power = cfg_.transmit_power / k_active;
    const double scale = std::sqrt(symbol_power);
    const NoiseModel noise{sigma2};

    const auto primary_bits = random_bits(rng, primary_bit_count);
    const auto secondary_bits = random_bits(rng, secondary_bit_count);

    // Phase 1: the primary transmitter sends K symbols on the first K
    // subcarriers; primary receiver and secondary transmitter both listen.
    const ImBlock phase1 = map_bits(primary_bits, phase1_table_, psk_, cfg_.transmit_power);
    const HopChannel pt_pr = sample_hop(rng, n, cfg_.source_dest_distance, cfg_.path_loss_exponent);
    const HopChannel pt_st = sample_hop(rng, n, hop_distances_[0], cfg_.path_loss_exponent);
    const HopChannel st_pr = sample_hop(rng, n, hop_distances_[1], cfg_.path_loss_exponent);
    const HopChannel st_sr = sample_hop(rng, n, hop_distances_[1], cfg_.path_loss_exponent);
    const auto pr_phase1 = transmit(phase1.amplitudes, pt_pr, noise, rng);
    const auto st_rx = transmit(phase1.amplitudes, pt_st, noise, rng);

    // The secondary transmitter decodes the primary symbols (errors propagate)
    // and re-transmits them on a SAP chosen by its own fresh bits.
    const DetectionResult st_det =
        ml_detect(st_rx, pt_st.gains, detector_noise_, phase1_table_, psk_, cfg_.transmit_power);
    int tx_sap = 0;
    for (int b = 0; b < secondary_bit_count; ++b) {
        tx_sap = (tx_sap << 1) | secondary_bits[static_cast<std::size_t>(b)];
    }
    const auto phase2 = remodulate(tx_sap, st_det.symbols);
    const auto pr_phase2 = transmit(phase2, st_pr, noise, rng);
    const auto sr_rx = transmit(phase2, st_sr, noise, rng);

    // Primary receiver: joint ML over both phases, searching every
    // (SAP, symbol tuple) and keeping only the symbols.
    std::vector<double> pw1(static_cast<std::size_t>(k_active));
    std::vector<double> cross1(static_cast<std::size_t>(k_active) * static_cast<std::size_t>(m));
    std::vector<double> pw2(static_cast<std::size_t>(n));
    std::vector<double> cross2(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
    for (int k = 0; k < k_active; ++k) {
        const auto s = static_cast<std::size_t>(k);
        const double inv_v = 1.0 / detector_noise_[s];
        const cdouble yg = std::conj(pr_phase1[s]) * pt_pr.gains[s];
        pw1[s] = symbol_power * std::norm(pt_pr.gains[s]) * inv_v;
        for (int p = 0; p < m; ++p) {
            cross1[s * static_cast<std::size_t>(m) + static_cast<std::size_t>(p)] =
                2.0 * scale * (yg * psk_.points[static_cast<std::size_t>(p)]).real() * inv_v;
        }
    }
    for (int i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double inv_v = 1.0 / detector_noise_[s];
        const cdouble yg = std::conj(pr_phase2[s]) * st_pr.gains[s];
        pw2[s] = symbol_power * std::norm(st_pr.gains[s]) * inv_v;
        for (int p = 0; p < m; ++p) {
            cross2[s * static_cast<std::size_t>(m) + static_cast<std::size_t>(p)] =
                2.0 * scale * (yg * psk_.points[static_cast<std::size_t>(p)]).real() * inv_v;
        }
    }

    const std::uint64_t symbol_candidates = 1ull << (k_active * bps);
    const auto label_mask = static_cast<std::uint32_t>(m - 1);
    double best = kInf;
    std::uint64_t best_labels = 0;
    std::vector<int> positions(static_cast<std::size_t>(k_active));
    for (std::size_t a = 0; a < table_.pattern_count(); ++a) {
        const std::uint32_t mask = table_.patterns[a];
        int idx = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) positions[static_cast<std::size_t>(idx++)] = i;
        }
        for (std::uint64_t c = 0; c < symbol_candidates; ++c) {
            double metric = 0.0;
            for (int k = 0; k < k_active; ++k) {
                const auto label =
                    static_cast<std::uint32_t>((c >> ((k_active - 1 - k) * bps)) & label_mask);
                const auto point = static_cast<std::size_t>(psk_.point_of_label[label]);
                const auto sk = static_cast<std::size_t>(k);
                const auto pos = static_cast<std::size_t>(positions[sk]);
                metric += pw1[sk] - cross1[sk * static_cast<std::size_t>(m) + point];
                metric += pw2[pos] - cross2[pos * static_cast<std::size_t>(m) + point];
            }
            if (metric < best) {
                best = metric;
                best_labels = c;
            }
        }
    }
    std::vector<int> joint_symbols(static_cast<std::size_t>(k_active));
    for (int k = 0; k < k_active; ++k) {
        const auto label =
            static_cast<std::uint32_t>((best_labels >> ((k_active - 1 - k) * bps)) & label_mask);
        joint_symbols[static_cast<std::size_t>(k)] = psk_.point_of_label[label];
    }
    const auto joint_bits = demap(0, joint_symbols, phase1_table_, psk_);

    // Paired baseline: primary detection from phase 1 alone.
    const DetectionResult phase1_det = ml_detect(pr_phase1, pt_pr.gains, detector_noise_,
                                                 phase1_table_, psk_, cfg_.transmit_power);
    const auto phase1_bits = demap(0, phase1_det.symbols, phase1_table_, psk_);

    // Secondary receiver: recovers the SAP, discarding the symbol estimate.
    const DetectionResult sr_det =
        ml_detect(sr_rx, st_sr.gains, detector_noise_, table_, psk_, cfg_.transmit_power);
    std::vector<std::uint8_t> sr_bits(static_cast<std::size_t>(secondary_bit_count));
    for (int b = 0; b < secondary_bit_count; ++b) {
        sr_bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(
            (sr_det.sap_index >> (secondary_bit_count - 1 - b)) & 1);
    }

    // Outage on the relayed primary path: symbol k travels PT->ST on
    // subcarrier k and ST->PR on the k-th active position of the phase-2 SAP.
    double min_snr = kInf;
    if (sigma2 > 0.0) {
        const auto phase2_positions = table_.active_positions(tx_sap);
        for (int k = 0; k < k_active; ++k) {
            const double snr1 =
                symbol_power * std::norm(pt_st.gains[static_cast<std::size_t>(k)]) / sigma2;
            const double snr2 =
                symbol_power *
                std::norm(st_pr.gains[static_cast<std::size_t>(phase2_positions[static_cast<std::size_t>(k)])]) /
                sigma2;
            min_snr = std::min(min_snr, std::min(snr1, snr2));
        }
    }

    if (trace) {
        trace->tx_mask = table_.patterns[static_cast<std::size_t>(tx_sap)];
        trace->hop_gains = {pt_pr.gains, pt_st.gains, st_pr.gains, st_sr.gains};
    }

    TrialOutcome out;
    out.primary_bits_sent = primary_bit_count;
    out.secondary_bits_sent = secondary_bit_count;
    out.primary_bit_errors = count_bit_errors(primary_bits, joint_bits);
    out.phase1_only_bit_errors = count_bit_errors(primary_bits, phase1_bits);
    out.secondary_bit_errors = count_bit_errors(secondary_bits, sr_bits);
    out.primary_block_error = out.primary_bit_errors > 0;
    out.secondary_block_error = out.secondary_bit_errors > 0;
    out.bits_sent = primary_bit_count + secondary_bit_count;
    out.bit_errors = out.primary_bit_errors + out.secondary_bit_errors;
    out.block_error = out.primary_block_error || out.secondary_block_error;
    out.outage = min_snr < cfg_.outage_threshold;
    out.channel_uses = channel_uses_per_trial();
    return out;
}

}  // namespace relayim
