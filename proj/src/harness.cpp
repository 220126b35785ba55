#include "relayim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace relayim {

namespace {

MetricAccumulator run_point(const TrialRunner& runner, std::uint64_t point_index,
                            const SweepSpec& spec, int worker_count) {
    const std::uint64_t trials = spec.trials_per_point;
    const auto make_acc = [&] {
        return MetricAccumulator(runner.bits_per_trial(), runner.channel_uses_per_trial(),
                                 runner.cr_mode());
    };

    const auto run_range = [&](std::uint64_t begin, std::uint64_t end, MetricAccumulator& acc) {
        for (std::uint64_t j = begin; j < end; ++j) {
            RandomStream stream = RandomStream::for_trial(spec.master_seed, point_index, j);
            acc.update(runner.run(stream));
        }
    };

    if (worker_count <= 1 || trials < 2) {
        MetricAccumulator acc = make_acc();
        run_range(0, trials, acc);
        return acc;
    }

    const auto workers = static_cast<std::uint64_t>(worker_count);
    const std::uint64_t chunk = (trials + workers - 1) / workers;
    std::vector<MetricAccumulator> partial(static_cast<std::size_t>(workers), make_acc());
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::uint64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::uint64_t begin = w * chunk;
            const std::uint64_t end = std::min(trials, begin + chunk);
            try {
                if (begin < end) run_range(begin, end, partial[static_cast<std::size_t>(w)]);
            } catch (...) {
                failures[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    // merge in worker order so the reduction is identical for every run
    MetricAccumulator acc = partial.front();
    for (std::size_t w = 1; w < partial.size(); ++w) acc.merge(partial[w]);
    return acc;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, int worker_count) {
    if (spec.pt_grid_db.empty()) throw std::invalid_argument("power grid is empty");
    for (std::size_t i = 1; i < spec.pt_grid_db.size(); ++i) {
        if (!(spec.pt_grid_db[i] > spec.pt_grid_db[i - 1])) {
            throw std::invalid_argument("power grid must be strictly ascending");
        }
    }
    if (spec.trials_per_point < 1) throw std::invalid_argument("need at least one trial per point");
    if (worker_count < 1) throw std::invalid_argument("need at least one worker");

    SweepResult result;
    result.pt_grid_db = spec.pt_grid_db;
    result.points.reserve(spec.pt_grid_db.size());
    for (std::size_t i = 0; i < spec.pt_grid_db.size(); ++i) {
        ScenarioConfig cfg = spec.config;
        const double reference = cfg.noise_var > 0.0 ? cfg.noise_var : 1.0;
        cfg.transmit_power = reference * std::pow(10.0, spec.pt_grid_db[i] / 10.0);
        const TrialRunner runner(cfg);
        result.points.push_back(run_point(runner, i, spec, worker_count).summarize());
    }
    return result;
}

double estimate_diversity_order(const SweepResult& result, double low_db, double high_db) {
    if (result.pt_grid_db.size() != result.points.size()) {
        throw std::invalid_argument("sweep result is misaligned");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < result.pt_grid_db.size(); ++i) {
        const double db = result.pt_grid_db[i];
        if (db < low_db - 1e-9 || db > high_db + 1e-9) continue;
        const double bler = result.points[i].bler;
        if (bler <= 0.0) {
            std::cerr << "warning: diversity fit skips " << db
                      << " dB (zero block-error estimate)\n";
            continue;
        }
        xs.push_back(db / 10.0);
        ys.push_back(-std::log10(bler));
    }
    if (xs.size() < 2) {
        throw std::runtime_error(
            "diversity estimation needs at least two grid points with nonzero BLER in [" +
            std::to_string(low_db) + ", " + std::to_string(high_db) + "] dB; found " +
            std::to_string(xs.size()));
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(xs.size());
    mean_y /= static_cast<double>(xs.size());
    double cov = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cov += (xs[i] - mean_x) * (ys[i] - mean_y);
        var += (xs[i] - mean_x) * (xs[i] - mean_x);
    }
    return cov / var;
}

}  // namespace relayim
