#include "fogswitch/planner.hpp"

#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string_view>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "fogswitch/rng.hpp"

namespace fogswitch {

namespace fs = std::filesystem;
using nlohmann::json;

std::map<std::string, std::size_t> count_records(const std::vector<MonitoringRecord>& records) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records) counts[r.instance_id]++;
    return counts;
}

ModelMap train_all(const std::vector<MonitoringRecord>& records,
                   const std::vector<ServiceInstance>& instances, RegressorKind kind,
                   std::uint64_t seed, bool parallel, std::map<std::string, double>* wall_ms) {
    std::map<std::string, std::pair<Rows, std::vector<double>>> by_instance;
    for (const auto& si : instances) by_instance[si.id];  // every instance needs data
    for (const auto& r : records) {
        auto it = by_instance.find(r.instance_id);
        if (it == by_instance.end()) {
            std::cerr << "warning: monitoring record for unknown instance '" << r.instance_id
                      << "' ignored\n";
            continue;
        }
        it->second.first.push_back(r.features.row());
        it->second.second.push_back(r.rt_ms);
    }
    for (const auto& [id, data] : by_instance)
        if (data.first.empty())
            throw fog_error(errc::missing_instance_data,
                            "instance '" + id + "' has no monitoring records");

    ModelMap models;
    std::vector<std::string> ids;
    for (const auto& [id, data] : by_instance) {
        ids.push_back(id);
        models[id];  // materialize slots so threads write disjoint entries
        if (wall_ms) (*wall_ms)[id] = 0.0;
    }

    auto train_one = [&](const std::string& id) {
        const auto& [X, y] = by_instance.at(id);
        auto start = std::chrono::steady_clock::now();
        models.at(id) = train_model(kind, X, y, mix_seed(seed, id));
        if (wall_ms)
            wall_ms->at(id) = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
    };

    if (!parallel || ids.size() <= 1) {
        for (const auto& id : ids) train_one(id);
        return models;
    }

    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> failures(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        workers.emplace_back([&, i] {
            try {
                train_one(ids[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        });
    for (auto& w : workers) w.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return models;
}

SwitchingDecision plan(const FeatureVector& f, const ModelMap& models,
                       const std::vector<ServiceInstance>& instances) {
    if (models.empty())
        throw fog_error(errc::non_positive_param, "no models to plan with");
    auto start = std::chrono::steady_clock::now();

    SwitchingDecision dec;
    dec.features = f;
    dec.kind = models.begin()->second.kind;

    // index once so a call stays linear in the instance count
    std::unordered_map<std::string_view, const ServiceInstance*> by_id;
    by_id.reserve(instances.size());
    for (const ServiceInstance& si : instances) by_id.emplace(si.id, &si);

    bool have = false;
    double best_rt = 0;
    Tier best_tier = Tier::Remote;
    for (const auto& [id, model] : models) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw fog_error(errc::unknown_instance, "model for unknown instance '" + id + "'");
        const ServiceInstance* si = it->second;
        double rt = predict(model, f);
        dec.predicted_rts[id] = rt;
        // map order is lexicographic, so on full ties the earliest id of the
        // preferred tier sticks
        bool better = !have || rt < best_rt ||
                      (rt == best_rt && si->machine.tier == Tier::Edge &&
                       best_tier == Tier::Remote);
        if (better) {
            have = true;
            best_rt = rt;
            best_tier = si->machine.tier;
            dec.chosen_instance_id = id;
        }
    }

    dec.plan_latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return dec;
}

void save_model_dir(const ModelMap& models, RegressorKind kind, std::uint64_t seed,
                    const std::map<std::string, std::size_t>& record_counts,
                    const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw fog_error(errc::io_failure, "cannot create '" + dir + "': " + ec.message());

    json manifest;
    manifest["kind"] = kind_name(kind);
    manifest["seed"] = seed;
    manifest["instances"] = json::object();
    for (const auto& [id, model] : models) {
        save_model(model, (fs::path(dir) / (id + ".fsm")).string());
        json entry;
        auto it = record_counts.find(id);
        entry["records"] = it == record_counts.end() ? 0 : it->second;
        if (model.kind == RegressorKind::Svr) {
            const auto& p = std::get<SvrPayload>(model.payload);
            entry["gamma"] = p.gamma;
            entry["converged"] = p.converged;
        }
        if (model.kind == RegressorKind::NeuralNet)
            entry["architecture"] = std::get<NnPayload>(model.payload).layer_sizes;
        manifest["instances"][id] = entry;
    }

    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
    if (!out)
        throw fog_error(errc::io_failure, "cannot write manifest in '" + dir + "'");
    out << manifest.dump(2) << '\n';
}

ModelDir load_model_dir(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in)
        throw fog_error(errc::model_load_failure, "no manifest.json in '" + dir + "'");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw fog_error(errc::model_load_failure, std::string("bad manifest: ") + e.what());
    }

    ModelDir out;
    try {
        out.kind = kind_from_name(manifest.at("kind").get<std::string>());
        out.seed = manifest.at("seed").get<std::uint64_t>();
        for (const auto& [id, entry] : manifest.at("instances").items()) {
            (void)entry;
            TrainedModel m = load_model((fs::path(dir) / (id + ".fsm")).string());
            if (m.kind != out.kind)
                throw fog_error(errc::model_load_failure,
                                "model '" + id + "' kind does not match the manifest");
            out.models.emplace(id, std::move(m));
        }
    } catch (const fog_error& e) {
        if (e.code() == errc::model_load_failure) throw;
        throw fog_error(errc::model_load_failure, e.what());
    } catch (const std::exception& e) {
        throw fog_error(errc::model_load_failure, e.what());
    }
    if (out.models.empty())
        throw fog_error(errc::model_load_failure, "manifest lists no instances");
    return out;
}

}  // namespace fogswitch
