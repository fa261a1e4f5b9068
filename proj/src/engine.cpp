#include "ecpr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "ecpr/context.hpp"
#include "ecpr/dcc.hpp"
#include "ecpr/propagation.hpp"
#include "ecpr/rng.hpp"

namespace ecpr {

namespace {

struct VehicleSlot {
    int ext_id = -1;
    bool active = false;
    Vec2 pos;
    double speed = 0.0;
    double heading = 0.0;
    double power_dbm = 0.0;
    double rate_hz = 0.0;
    double target_range_m = 90.0;
    double target_rate_hz = 10.0;
    double emit_acc = 0.0;
    double prev_cbr = 0.0;
    std::vector<int> prev_neighborhood;  // slots decoded in the previous step
    // accumulators for the current metrics window
    double rate_sum = 0.0;
    double power_sum = 0.0;
    int window_steps = 0;
};

struct PairLink {
    bool evaluated = false;
    LinkClass cls = LinkClass::los;
    double distance_m = 0.0;
    double pathloss_db = 0.0;
    double fading_db = 0.0;
};

struct NextState {
    double power_dbm = 0.0;
    double rate_hz = 0.0;
    std::vector<int> neighborhood;
    DecisionLogRow row;
    long rejected = 0;
};

std::size_t pair_index(std::size_t ai, std::size_t bi, std::size_t n) {
    // ai < bi < n
    return ai * (2 * n - ai - 1) / 2 + (bi - ai - 1);
}

// Strided parallel loop: thread t handles indices i with i % nthreads == t,
// so per-index ownership is fixed regardless of scheduling. Exceptions are
// rethrown on the calling thread.
void parallel_for(int threads, std::size_t count, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    auto nthreads = static_cast<std::size_t>(threads);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < count; i += nthreads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

double radio_horizon_m(const SimConfig& cfg) {
    const PropagationParams& p = cfg.propagation;
    double min_ple = std::min({p.ple_los, p.ple_nlos_vehicle, p.ple_nlos_building});
    double ref = (cfg.power_bounds.max_dbm - cfg.rx_sensitivity + 10.0) / min_ple;
    return cfg.wavelength_m() / (4.0 * M_PI) * std::pow(10.0, ref / 10.0);
}

double RunSummary::steady_mean(double StepMetrics::*field, int skip_seconds) const {
    double sum = 0.0;
    int n = 0;
    for (const StepMetrics& m : seconds) {
        if (m.second < skip_seconds) continue;
        sum += m.*field;
        ++n;
    }
    return n > 0 ? sum / n : 0.0;
}

RunSummary run_scenario(const SimConfig& cfg, MobilityModel& mobility,
                        const RunObserver* observer) {
    cfg.validate();
    const double dt = cfg.control_step;
    const double lambda = cfg.wavelength_m();
    const double capacity = cfg.capacity_bytes();
    const double horizon = radio_horizon_m(cfg);
    const int steps_per_second = cfg.steps_per_second();
    const auto total_steps =
        static_cast<std::int64_t>(std::llround(cfg.scenario.duration_s / dt));
    const Algorithm algo = cfg.scenario.algorithm;
    const BuildingSet& buildings = mobility.buildings();

    const RateParams rate_params{cfg.limeric_a, cfg.limeric_b, cfg.limeric_x,
                                 cfg.limeric_gain, cfg.limeric_mode, cfg.cbr_threshold,
                                 cfg.rate_bounds};
    const CombinerParams combiner{cfg.cbr_threshold, cfg.gamma, cfg.combiner_mode,
                                  cfg.power_bounds};

    // Context assignment by vehicle index; for traces the index is the rank
    // of the external id among all ids in the trace.
    std::vector<ContextAssignment> contexts = assign_context_profile(
        cfg.test_profile, cfg.scenario.vehicle_count, cfg.rng_seed, cfg.integer_rates,
        cfg.custom_target_range, cfg.custom_target_rate);

    std::vector<VehicleSlot> slots;
    std::map<int, int> id_to_slot;
    auto slot_for = [&](int ext_id) {
        auto it = id_to_slot.find(ext_id);
        if (it != id_to_slot.end()) return it->second;
        int s = static_cast<int>(slots.size());
        id_to_slot.emplace(ext_id, s);
        slots.emplace_back();
        VehicleSlot& v = slots.back();
        v.ext_id = ext_id;
        v.power_dbm = clamp(cfg.default_tx_power, cfg.power_bounds.min_dbm,
                            cfg.power_bounds.max_dbm);
        const ContextAssignment& ctx =
            contexts[static_cast<std::size_t>(s) % contexts.size()];
        v.target_range_m = ctx.target_range_m;
        v.target_rate_hz = clamp(ctx.target_rate_hz, cfg.rate_bounds.min_hz,
                                 cfg.rate_bounds.max_hz);
        // Adaptive-rate algorithms warm up at the maximum rate; fixed-rate
        // ones transmit at their target from the start.
        bool adaptive_rate = algo == Algorithm::ecpr || algo == Algorithm::rate_only;
        v.rate_hz = adaptive_rate ? cfg.rate_bounds.max_hz : v.target_rate_hz;
        return s;
    };

    RunSummary summary;
    summary.min_power_dbm = summary.min_rate_hz = 1e300;
    summary.max_power_dbm = summary.max_rate_hz = -1e300;

    std::vector<VehiclePose> poses;
    std::vector<int> active;              // slot indices, ascending
    std::vector<Vec2> act_pos;            // positions of active slots
    std::vector<PairLink> links;
    std::vector<int> emissions;           // per active index
    std::vector<double> cbr_now;          // per active index
    std::vector<std::vector<NeighborObservation>> window_obs;  // per active index
    std::vector<std::vector<ReceptionLogRow>> event_buf;
    std::vector<NextState> next_states;
    std::vector<std::uint16_t> heard;     // slots x slots, current second
    std::size_t heard_stride = 0;
    std::vector<double> cbr_pool;         // cbr samples within current second
    std::vector<std::vector<int>> scratch_per_thread;

    PleDiagnostics global_diag;

    for (std::int64_t step = 0; step < total_steps; ++step) {
        // 1. Mobility.
        mobility.poses_at(step, poses);
        for (VehicleSlot& s : slots) s.active = false;
        for (const VehiclePose& p : poses) {
            VehicleSlot& v = slots[static_cast<std::size_t>(slot_for(p.id))];
            v.active = true;
            v.pos = p.pos;
            v.speed = p.speed_mps;
            v.heading = p.heading_rad;
        }
        const std::size_t n_slots = slots.size();
        active.clear();
        act_pos.clear();
        for (std::size_t s = 0; s < n_slots; ++s) {
            if (slots[s].active) {
                active.push_back(static_cast<int>(s));
                act_pos.push_back(slots[s].pos);
            }
        }
        const std::size_t n_act = active.size();
        if (heard_stride < n_slots) {
            // Slots only grow; re-layout the window counts at the new stride.
            std::vector<std::uint16_t> grown(n_slots * n_slots, 0);
            for (std::size_t i = 0; i < heard_stride; ++i) {
                for (std::size_t j = 0; j < heard_stride; ++j) {
                    grown[i * n_slots + j] = heard[i * heard_stride + j];
                }
            }
            heard = std::move(grown);
            heard_stride = n_slots;
        }
        if (observer && observer->on_positions) observer->on_positions(step, poses);
        if (n_act == 0) continue;

        // 2. Emissions at the current rate; fractional remainders carry over
        // so the long-run emission rate equals the rate exactly.
        emissions.assign(n_act, 0);
        for (std::size_t i = 0; i < n_act; ++i) {
            VehicleSlot& v = slots[static_cast<std::size_t>(active[i])];
            v.emit_acc += v.rate_hz * dt;
            int n = static_cast<int>(std::floor(v.emit_acc));
            v.emit_acc -= n;
            emissions[i] = n;
            summary.total_messages += n;
        }

        // 3. Pair link evaluation.
        links.assign(n_act * (n_act - 1) / 2, PairLink{});
        VehicleGrid vgrid(act_pos, std::max(4.0 * cfg.vehicle_radius, 25.0));
        scratch_per_thread.assign(static_cast<std::size_t>(std::max(cfg.threads, 1)), {});
        {
            std::vector<int> seq_scratch;
            parallel_for(cfg.threads, n_act, [&](std::size_t ai) {
                std::vector<int>& scratch =
                    cfg.threads <= 1 ? seq_scratch
                                     : scratch_per_thread[ai % scratch_per_thread.size()];
                for (std::size_t bi = ai + 1; bi < n_act; ++bi) {
                    double d = distance(act_pos[ai], act_pos[bi]);
                    if (d > horizon || d <= 0.0) continue;
                    PairLink& L = links[pair_index(ai, bi, n_act)];
                    ObstructionResult obs_res = classify_link_grid(
                        act_pos[ai], act_pos[bi], buildings, vgrid, act_pos,
                        static_cast<int>(ai), static_cast<int>(bi), cfg.vehicle_radius,
                        scratch);
                    L.evaluated = true;
                    L.cls = obs_res.link_class;
                    L.distance_m = static_cast<float>(d);
                    L.pathloss_db =
                        cfg.propagation.ple(L.cls) * reference_loss_db(d, lambda);
                    int id_a = slots[static_cast<std::size_t>(active[ai])].ext_id;
                    int id_b = slots[static_cast<std::size_t>(active[bi])].ext_id;
                    L.fading_db = pair_fading_db(cfg.rng_seed, id_a, id_b, step,
                                                 cfg.propagation.sigma_db(L.cls));
                }
            });
        }

        // 4. Reception, CBR, observations.
        cbr_now.assign(n_act, 0.0);
        if (window_obs.size() < n_act) window_obs.resize(n_act);
        bool want_events = observer && observer->on_event;
        if (want_events) event_buf.assign(n_act, {});
        parallel_for(cfg.threads, n_act, [&](std::size_t ri) {
            VehicleSlot& rcv = slots[static_cast<std::size_t>(active[ri])];
            auto& obs_list = window_obs[ri];
            obs_list.clear();
            double bytes = static_cast<double>(emissions[ri]) * cfg.msg_length;  // own tx
            for (std::size_t si = 0; si < n_act; ++si) {
                if (si == ri) continue;
                const PairLink& L =
                    links[pair_index(std::min(ri, si), std::max(ri, si), n_act)];
                if (!L.evaluated) continue;
                const VehicleSlot& snd = slots[static_cast<std::size_t>(active[si])];
                int n_msgs = emissions[si];
                if (n_msgs == 0) continue;
                LinkBudget budget;
                budget.link_class = L.cls;
                budget.pathloss_db = L.pathloss_db;
                budget.fading_db = L.fading_db;
                budget.rx_power_dbm = snd.power_dbm - L.pathloss_db + L.fading_db;
                if (budget.rx_power_dbm >= cfg.carrier_sense_threshold) {
                    bytes += static_cast<double>(n_msgs) * cfg.msg_length;
                }
                for (int j = 0; j < n_msgs; ++j) {
                    RngStream coin_rng(derive_seed(
                        cfg.rng_seed, StreamId::mac_coin,
                        static_cast<std::uint64_t>(snd.ext_id) << 20 |
                            static_cast<std::uint64_t>(j),
                        static_cast<std::uint64_t>(rcv.ext_id),
                        static_cast<std::uint64_t>(step)));
                    ReceptionEvent ev = decide_reception(
                        budget, snd.ext_id, rcv.ext_id, j, rcv.prev_cbr,
                        cfg.collisions_enabled, cfg.rx_sensitivity, coin_rng.next_unit());
                    if (ev.received) {
                        NeighborObservation o;
                        o.sender_id = active[si];  // slot index: stable across steps
                        o.msg_index = j;
                        o.tx_power_dbm = snd.power_dbm;
                        o.rx_power_dbm = budget.rx_power_dbm;
                        o.distance_m = L.distance_m;
                        o.rx_time_s = static_cast<double>(step) * dt;
                        o.msg_length_bytes = cfg.msg_length;
                        obs_list.push_back(o);
                    }
                    if (want_events) {
                        event_buf[ri].push_back({step, snd.ext_id, rcv.ext_id,
                                                 budget.rx_power_dbm, ev.received,
                                                 ev.drop_cause});
                    }
                }
            }
            cbr_now[ri] = clamp_cbr(bytes / capacity);
        });
        if (want_events) {
            for (std::size_t ri = 0; ri < n_act; ++ri) {
                for (const ReceptionLogRow& r : event_buf[ri]) observer->on_event(r);
            }
        }

        // 5. Awareness bookkeeping for the current second.
        for (std::size_t ri = 0; ri < n_act; ++ri) {
            auto r_slot = static_cast<std::size_t>(active[ri]);
            for (const NeighborObservation& o : window_obs[ri]) {
                std::uint16_t& h =
                    heard[r_slot * n_slots + static_cast<std::size_t>(o.sender_id)];
                if (h < 0xffff) ++h;
            }
        }

        // 6. Controllers; all vehicles read the same just-measured window and
        // commit together afterwards.
        next_states.assign(n_act, NextState{});
        parallel_for(cfg.threads, n_act, [&](std::size_t vi) {
            const VehicleSlot& me = slots[static_cast<std::size_t>(active[vi])];
            NextState& nx = next_states[vi];
            double cbr = cbr_now[vi];
            PleDiagnostics diag;

            // Detected neighborhood this window (active indices, ascending;
            // observations are already sender-major).
            const auto& obs_list = window_obs[vi];
            for (std::size_t k = 0; k < obs_list.size(); ++k) {
                if (k == 0 || obs_list[k].sender_id != obs_list[k - 1].sender_id) {
                    nx.neighborhood.push_back(obs_list[k].sender_id);
                }
            }

            double next_power = me.power_dbm;
            double next_rate = me.rate_hz;
            double enar = 0.0;
            DccDecision decision;

            if (algo == Algorithm::ecpr || algo == Algorithm::power_only) {
                std::vector<double> required;
                std::vector<double> reverse_pl;
                std::size_t k = 0;
                while (k < obs_list.size()) {
                    std::size_t end = k;
                    while (end < obs_list.size() &&
                           obs_list[end].sender_id == obs_list[k].sender_id) {
                        ++end;
                    }
                    double d = obs_list[k].distance_m;
                    if (d <= me.target_range_m) {
                        int sender = obs_list[k].sender_id;
                        bool known = std::binary_search(me.prev_neighborhood.begin(),
                                                        me.prev_neighborhood.end(), sender);
                        if (known) {
                            try {
                                required.push_back(required_power_to_neighbor(
                                    std::span(obs_list).subspan(k, end - k),
                                    me.target_range_m, lambda, cfg.eq3_floor,
                                    cfg.rx_sensitivity, &diag));
                            } catch (const domain_error&) {
                                // every observation in the window rejected
                            }
                        } else {
                            required.push_back(cfg.default_tx_power);
                        }
                        double pl_sum = 0.0;
                        for (std::size_t m = k; m < end; ++m) {
                            pl_sum += obs_list[m].tx_power_dbm - obs_list[m].rx_power_dbm;
                        }
                        reverse_pl.push_back(pl_sum / static_cast<double>(end - k));
                    }
                    k = end;
                }
                double candidate = select_tx_power(std::move(required), cfg.awareness_target,
                                                   cfg.power_bounds, cfg.default_tx_power);
                RngStream eps_rng(derive_seed(cfg.rng_seed, StreamId::enar_error,
                                              static_cast<std::uint64_t>(me.ext_id),
                                              static_cast<std::uint64_t>(step)));
                double eps = eps_rng.next_uniform(-cfg.enar_error_bound, cfg.enar_error_bound);
                enar = estimate_enar(reverse_pl, me.power_dbm, cfg.rx_sensitivity, eps);

                if (algo == Algorithm::ecpr) {
                    decision = ecpr_decide(candidate, me.power_dbm, cbr, enar,
                                           cfg.awareness_target, me.target_rate_hz,
                                           me.rate_hz, combiner);
                    next_power = decision.next_power_dbm;
                    next_rate = rate_step(me.rate_hz, cbr, rate_params);
                } else {
                    // Power-only control ignores the channel load entirely.
                    next_power = candidate;
                    next_rate = me.target_rate_hz;
                }
            } else if (algo == Algorithm::rate_only) {
                next_power = clamp(cfg.default_tx_power, cfg.power_bounds.min_dbm,
                                   cfg.power_bounds.max_dbm);
                next_rate = rate_step(me.rate_hz, cbr, rate_params);
            } else {  // Algorithm::none
                next_power = clamp(cfg.default_tx_power, cfg.power_bounds.min_dbm,
                                   cfg.power_bounds.max_dbm);
                next_rate = me.target_rate_hz;
            }

            if (!std::isfinite(next_power) || !std::isfinite(next_rate)) {
                throw domain_error("NaN in controller output at step " + std::to_string(step) +
                                   ", vehicle " + std::to_string(me.ext_id));
            }
            nx.power_dbm = clamp(next_power, cfg.power_bounds.min_dbm, cfg.power_bounds.max_dbm);
            nx.rate_hz = clamp(next_rate, cfg.rate_bounds.min_hz, cfg.rate_bounds.max_hz);
            nx.rejected = diag.rejected_observations;
            nx.row = {step,
                      me.ext_id,
                      me.power_dbm,
                      me.rate_hz,
                      cbr,
                      enar,
                      decision.delta_awareness,
                      decision.delta_rate,
                      decision.state_row};
        });

        // 7. Commit, stats, logs.
        for (std::size_t vi = 0; vi < n_act; ++vi) {
            VehicleSlot& v = slots[static_cast<std::size_t>(active[vi])];
            NextState& nx = next_states[vi];
            summary.min_power_dbm = std::min(summary.min_power_dbm, v.power_dbm);
            summary.max_power_dbm = std::max(summary.max_power_dbm, v.power_dbm);
            summary.min_rate_hz = std::min(summary.min_rate_hz, v.rate_hz);
            summary.max_rate_hz = std::max(summary.max_rate_hz, v.rate_hz);
            v.rate_sum += v.rate_hz;
            v.power_sum += v.power_dbm;
            v.window_steps += 1;
            cbr_pool.push_back(cbr_now[vi]);
            summary.rejected_observations += nx.rejected;
            if (observer && observer->on_decision) observer->on_decision(nx.row);
            v.power_dbm = nx.power_dbm;
            v.rate_hz = nx.rate_hz;
            v.prev_cbr = cbr_now[vi];
            v.prev_neighborhood = std::move(nx.neighborhood);
        }

        // 8. Metrics at each whole second.
        if ((step + 1) % steps_per_second == 0) {
            int second = static_cast<int>((step + 1) / steps_per_second) - 1;
            // Compact window over active slots.
            std::vector<Vec2> win_pos(n_act);
            std::vector<std::uint16_t> win_heard(n_act * n_act, 0);
            for (std::size_t i = 0; i < n_act; ++i) {
                win_pos[i] = slots[static_cast<std::size_t>(active[i])].pos;
                auto si = static_cast<std::size_t>(active[i]);
                for (std::size_t j = 0; j < n_act; ++j) {
                    win_heard[i * n_act + j] =
                        heard[si * n_slots + static_cast<std::size_t>(active[j])];
                }
            }
            AwarenessWindow win{win_pos, win_heard, static_cast<int>(n_act)};

            std::vector<PerVehicleMetrics> pv(n_act);
            std::vector<int> neighbors;
            std::vector<char> audible;
            for (std::size_t i = 0; i < n_act; ++i) {
                VehicleSlot& v = slots[static_cast<std::size_t>(active[i])];
                PerVehicleMetrics& m = pv[i];
                m.nar = compute_nar(win, static_cast<int>(i), v.target_range_m);
                m.rnar = compute_rnar(win, static_cast<int>(i), v.target_range_m);
                m.rate_hz = v.window_steps > 0 ? v.rate_sum / v.window_steps : v.rate_hz;
                m.power_dbm = v.window_steps > 0 ? v.power_sum / v.window_steps : v.power_dbm;
                // Hidden-node analysis: ego's neighbors are the senders it
                // heard this second; a pair is audible when each heard the
                // other within the same window.
                neighbors.clear();
                for (std::size_t j = 0; j < n_act; ++j) {
                    if (j != i && win.heard_from(static_cast<int>(i), static_cast<int>(j))) {
                        neighbors.push_back(static_cast<int>(j));
                    }
                }
                std::size_t nn = neighbors.size();
                audible.assign(nn * nn, 0);
                for (std::size_t a = 0; a < nn; ++a) {
                    for (std::size_t b = 0; b < nn; ++b) {
                        audible[a * nn + b] =
                            win.heard_from(neighbors[a], neighbors[b]) ? 1 : 0;
                    }
                }
                m.hidden_node_ratio =
                    hidden_node_ratio(std::span<const char>(audible.data(), audible.size()),
                                      static_cast<int>(nn));
                v.rate_sum = 0.0;
                v.power_sum = 0.0;
                v.window_steps = 0;
            }
            StepMetrics row = aggregate_step(second, pv, cbr_pool);
            summary.seconds.push_back(row);
            if (observer && observer->on_second) observer->on_second(row);
            std::fill(heard.begin(), heard.end(), 0);
            cbr_pool.clear();
        }
    }

    if (summary.min_power_dbm > summary.max_power_dbm) {
        summary.min_power_dbm = summary.max_power_dbm = cfg.default_tx_power;
        summary.min_rate_hz = summary.max_rate_hz = cfg.rate_bounds.max_hz;
    }
    return summary;
}

RunSummary run_scenario(const SimConfig& cfg, const RunObserver* observer) {
    auto mobility = make_mobility(cfg);
    return run_scenario(cfg, *mobility, observer);
}

}  // namespace ecpr
