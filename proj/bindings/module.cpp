#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imb/bench.hpp"
#include "imb/index.hpp"
#include "imb/report.hpp"
#include "imb/tmam.hpp"
#include "imb/types.hpp"
#include "imb/workload.hpp"

namespace py = pybind11;

namespace {

using namespace imb;

// Thin ownership wrapper so one Python class covers every index kind.
class PyIndex {
  public:
    explicit PyIndex(const std::string& kind) : index_(make_index(kind)) {}

    std::string insert(Key key, Value value) { return to_string(index_->insert(key, value)); }
    std::optional<Value> read(Key key) const { return index_->read(key); }
    std::string update(Key key, Value value) { return to_string(index_->update(key, value)); }
    std::string erase(Key key) { return to_string(index_->erase(key)); }
    void bulk_load(const std::vector<std::pair<Key, Value>>& items) { index_->bulk_load(items); }
    std::size_t size() const { return index_->size(); }
    std::string name() const { return index_->name(); }

    std::vector<std::pair<Key, Value>> items() const {
        std::vector<std::pair<Key, Value>> out;
        index_->collect(out);
        return out;
    }

  private:
    std::unique_ptr<Index> index_;
};

MixSpec mix_from_object(const py::object& mix) {
    if (py::isinstance<py::str>(mix)) return builtin_mix(mix.cast<std::string>());
    auto parts = mix.cast<std::vector<double>>();
    if (parts.size() != 4)
        throw std::invalid_argument("mix must be a name or four fractions");
    return {parts[0], parts[1], parts[2], parts[3]};
}

WorkloadConfig workload_from_args(const std::string& pattern, std::uint64_t population,
                                  Key domain_lo, Key domain_hi, std::uint64_t requests,
                                  const py::object& mix, std::uint64_t seed) {
    WorkloadConfig cfg;
    cfg.pattern = pattern_from_string(pattern);
    cfg.population = population;
    cfg.domain_lo = domain_lo;
    // A zero upper bound sizes the domain to fit the population plus every
    // insert the request stream could ask for, matching the CLI.
    cfg.domain_hi = domain_hi != 0 ? domain_hi : domain_lo + 2 * (population + requests);
    cfg.request_count = requests;
    cfg.mix = mix_from_object(mix);
    cfg.seed = seed;
    validate_config(cfg);
    return cfg;
}

py::dict generate_workload(const std::string& pattern, std::uint64_t population, Key domain_lo,
                           Key domain_hi, std::uint64_t requests, const py::object& mix,
                           std::uint64_t seed) {
    auto cfg = workload_from_args(pattern, population, domain_lo, domain_hi, requests, mix, seed);
    // Same stream derivation as the harness, so a seed names one workload
    // everywhere.
    Rng master(cfg.seed);
    Rng population_rng = master.split();
    Rng request_rng = master.split();
    auto pop = generate_population(cfg, population_rng);
    auto reqs = generate_requests(cfg, pop, request_rng);

    py::list request_list;
    for (const auto& req : reqs)
        request_list.append(py::make_tuple(to_string(req.kind), req.key, req.value));
    py::dict out;
    out["population"] = py::cast(pop);
    out["requests"] = request_list;
    return out;
}

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: throw std::runtime_error("unexpected json value");
    }
}

py::dict attribution(const std::map<std::string, std::uint64_t>& counts,
                     std::uint32_t issue_width) {
    CounterSample sample;
    sample.issue_width = issue_width;
    sample.counts = counts;
    auto t = compute_tmam(sample);

    py::dict out;
    if (t.cpi_valid) out["cpi"] = t.cpi;
    if (t.level1_valid) {
        py::dict level1;
        level1["retiring"] = t.level1.retiring;
        level1["bad_speculation"] = t.level1.bad_speculation;
        level1["frontend_bound"] = t.level1.frontend_bound;
        level1["backend_bound"] = t.level1.backend_bound;
        out["level1"] = level1;
    }
    if (t.backend_valid) {
        py::dict backend;
        backend["core_bound"] = t.backend.core_bound;
        backend["memory_bound"] = t.backend.memory_bound;
        out["backend"] = backend;
    }
    if (t.memory_valid) {
        py::dict memory;
        memory["l1_bound"] = t.memory.l1_bound;
        memory["l2_bound"] = t.memory.l2_bound;
        memory["l3_bound"] = t.memory.l3_bound;
        memory["dram_bound"] = t.memory.dram_bound;
        memory["store_bound"] = t.memory.store_bound;
        out["memory"] = memory;
    }
    return out;
}

py::dict run_experiment_py(const std::string& index, const std::string& pattern,
                           std::uint64_t population, Key domain_lo, Key domain_hi,
                           std::uint64_t requests, const py::object& mix, std::uint64_t seed,
                           std::uint64_t warmup, bool counters,
                           const std::string& event_map_path) {
    ExperimentConfig cfg;
    cfg.index_name = index;
    cfg.workload =
        workload_from_args(pattern, population, domain_lo, domain_hi, requests, mix, seed);
    cfg.warmup_reads = warmup;
    cfg.collect_counters = counters;
    cfg.event_map_path = event_map_path;

    RunReport report;
    {
        py::gil_scoped_release release;
        report = run_experiment(cfg);
    }
    return json_to_py(to_json(report));
}

}  // namespace

PYBIND11_MODULE(_imb, m) {
    m.doc() = "learned-index and tree-index microbenchmark core";

    py::class_<PyIndex>(m, "Index")
        .def(py::init<const std::string&>(), py::arg("kind"),
             "Create an index: alex, art, btree, oracle, or noop.")
        .def("insert", &PyIndex::insert, py::arg("key"), py::arg("value"),
             "Insert a pair; returns ok or already_exists.")
        .def("read", &PyIndex::read, py::arg("key"))
        .def("update", &PyIndex::update, py::arg("key"), py::arg("value"))
        .def("erase", &PyIndex::erase, py::arg("key"))
        .def("bulk_load", &PyIndex::bulk_load, py::arg("items"),
             "Replace contents with sorted unique (key, value) pairs.")
        .def("items", &PyIndex::items, "All pairs in key order.")
        .def("__len__", &PyIndex::size)
        .def_property_readonly("name", &PyIndex::name);

    m.def("builtin_mix",
          [](const std::string& name) {
              auto mix = builtin_mix(name);
              return py::make_tuple(mix.read, mix.update, mix.insert, mix.del);
          },
          py::arg("name"), "Fractions (read, update, insert, delete) for a named mix.");

    m.def("generate_workload", &generate_workload, py::arg("pattern"), py::arg("population"),
          py::arg("domain_lo"), py::arg("domain_hi"), py::arg("requests"),
          py::arg("mix") = "read_heavy", py::arg("seed") = 1,
          "Deterministic population and request stream for the given shape.");

    m.def("attribution", &attribution, py::arg("counts"), py::arg("issue_width") = 4,
          "Pipeline-slot attribution from raw counter values; sections appear "
          "only when their counters are present.");

    m.def("run_experiment", &run_experiment_py, py::arg("index"), py::arg("pattern") = "random",
          py::arg("population") = 160'000, py::arg("domain_lo") = 0, py::arg("domain_hi") = 0,
          py::arg("requests") = 100'000, py::arg("mix") = "read_heavy", py::arg("seed") = 1,
          py::arg("warmup") = 100'000, py::arg("counters") = true,
          py::arg("event_map") = std::string(),
          "Populate, warm up, and time one workload; returns the full report "
          "as nested dicts. domain_hi of 0 sizes the domain automatically.");
}
