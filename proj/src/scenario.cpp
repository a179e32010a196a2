#include "resopt/scenario.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "resopt/errors.hpp"

namespace resopt::scenario {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError("scenario: " + where + " " + what);
}

const json& require_object(const json& doc, const std::string& where) {
    if (!doc.is_object()) {
        fail(where, "must be an object");
    }
    return doc;
}

// Strict schema: every present key must be known, every required key present.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : required) {
            known = known || item.key() == key;
        }
        for (const char* key : optional) {
            known = known || item.key() == key;
        }
        if (!known) {
            fail(where, "has unknown key '" + item.key() + "'");
        }
    }
    for (const char* key : required) {
        if (!obj.contains(key)) {
            fail(where, "is missing required key '" + std::string(key) + "'");
        }
    }
}

double get_number(const json& obj, const std::string& where, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        fail(where + "." + key, "must be a number");
    }
    return v.get<double>();
}

std::size_t get_count(const json& obj, const std::string& where, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        fail(where + "." + key, "must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

Mechanism parse_mechanism(const json& doc) {
    const auto& obj = require_object(doc, "mechanism");
    if (!obj.contains("type") || !obj.at("type").is_string()) {
        fail("mechanism.type", "must be a string");
    }
    const auto type = obj.at("type").get<std::string>();
    if (type == "two_period") {
        check_keys(obj, "mechanism", {"type", "C", "k"});
        return pricing::validate_params(get_number(obj, "mechanism", "C"),
                                        get_number(obj, "mechanism", "k"));
    }
    if (type == "three_period") {
        check_keys(obj, "mechanism", {"type", "C", "k", "alpha"});
        return multiperiod::validate_three_period_params(get_number(obj, "mechanism", "C"),
                                                         get_number(obj, "mechanism", "k"),
                                                         get_number(obj, "mechanism", "alpha"));
    }
    if (type == "m_period") {
        check_keys(obj, "mechanism", {"type", "C", "k", "beta", "m"});
        MPeriodMechanism m;
        m.spot_ratio = get_number(obj, "mechanism", "C");
        m.curvature = get_number(obj, "mechanism", "k");
        m.beta = get_number(obj, "mechanism", "beta");
        m.periods = get_count(obj, "mechanism", "m");
        pricing::validate_params(m.spot_ratio, m.curvature);
        multiperiod::mperiod_weights(m.beta, m.periods);
        return m;
    }
    fail("mechanism.type", "must be one of two_period, three_period, m_period");
}

sim::Population parse_population(const json& doc, const std::filesystem::path& base_dir) {
    const auto& obj = require_object(doc, "population");
    if (!obj.contains("type") || !obj.at("type").is_string()) {
        fail("population.type", "must be a string");
    }
    const auto type = obj.at("type").get<std::string>();
    if (type == "uniform_p") {
        check_keys(obj, "population", {"type", "a", "b"});
        return sim::UniformP{get_number(obj, "population", "a"),
                             get_number(obj, "population", "b")};
    }
    if (type == "users") {
        check_keys(obj, "population", {"type", "users"});
        const auto& arr = obj.at("users");
        if (!arr.is_array() || arr.empty()) {
            fail("population.users", "must be a non-empty array");
        }
        std::vector<sim::TwoPeriodUser> users;
        users.reserve(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "population.users[" + std::to_string(i) + "]";
            const auto& u = require_object(arr[i], where);
            check_keys(u, where, {"p"}, {"v"});
            sim::TwoPeriodUser user;
            user.use_probability = get_number(u, where, "p");
            if (u.contains("v")) {
                user.value = get_number(u, where, "v");
            }
            users.push_back(user);
        }
        return users;
    }
    if (type == "users_csv") {
        check_keys(obj, "population", {"type", "path"});
        if (!obj.at("path").is_string()) {
            fail("population.path", "must be a string");
        }
        std::filesystem::path path = obj.at("path").get<std::string>();
        if (path.is_relative()) {
            path = base_dir / path;
        }
        return load_users_csv(path);
    }
    if (type == "info_structures") {
        check_keys(obj, "population", {"type", "infos"});
        const auto& arr = obj.at("infos");
        if (!arr.is_array() || arr.empty()) {
            fail("population.infos", "must be a non-empty array");
        }
        std::vector<sim::ThreePeriodUser> users;
        users.reserve(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "population.infos[" + std::to_string(i) + "]";
            const auto& u = require_object(arr[i], where);
            check_keys(u, where, {"p1", "p21", "p22"}, {"v"});
            sim::ThreePeriodUser user;
            user.info = multiperiod::validate_info(get_number(u, where, "p1"),
                                                   get_number(u, where, "p21"),
                                                   get_number(u, where, "p22"));
            if (u.contains("v")) {
                user.value = get_number(u, where, "v");
            }
            users.push_back(user);
        }
        return users;
    }
    fail("population.type", "must be one of uniform_p, users, users_csv, info_structures");
}

sim::Strategy parse_strategy(const json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "truthful") {
            return sim::Truthful{};
        }
        fail("run.strategy", "must be \"truthful\", {\"fixed_report\": q} or "
                             "{\"grid_optimizer\": step}");
    }
    const auto& obj = require_object(v, "run.strategy");
    if (obj.contains("fixed_report")) {
        check_keys(obj, "run.strategy", {"fixed_report"});
        return sim::FixedReport{get_number(obj, "run.strategy", "fixed_report")};
    }
    if (obj.contains("grid_optimizer")) {
        check_keys(obj, "run.strategy", {"grid_optimizer"});
        return sim::GridOptimizer{get_number(obj, "run.strategy", "grid_optimizer")};
    }
    fail("run.strategy", "must name fixed_report or grid_optimizer");
}

Scenario parse_document(const json& doc, const std::filesystem::path& base_dir) {
    const auto& root = require_object(doc, "document");
    check_keys(root, "document", {"mechanism", "population", "run"});

    Scenario out;
    out.mechanism = parse_mechanism(root.at("mechanism"));
    out.population = parse_population(root.at("population"), base_dir);

    const auto& run = require_object(root.at("run"), "run");
    check_keys(run, "run", {"n_users", "replications"}, {"seed", "cost_model", "strategy"});
    out.n_users = get_count(run, "run", "n_users");
    out.replications = get_count(run, "run", "replications");
    if (out.n_users < 1) {
        fail("run.n_users", "must be >= 1");
    }
    if (out.replications < 1) {
        fail("run.replications", "must be >= 1");
    }
    if (run.contains("seed")) {
        if (!run.at("seed").is_number_unsigned()) {
            fail("run.seed", "must be a non-negative integer");
        }
        out.seed = run.at("seed").get<std::uint64_t>();
    }
    if (run.contains("cost_model")) {
        const auto& v = run.at("cost_model");
        if (v.is_string() && v.get<std::string>() == "forfeit") {
            out.cost_model = sim::CostModel::forfeit;
        } else if (v.is_string() && v.get<std::string>() == "resale") {
            out.cost_model = sim::CostModel::resale;
        } else {
            fail("run.cost_model", "must be \"forfeit\" or \"resale\"");
        }
    }
    if (run.contains("strategy")) {
        out.strategy = parse_strategy(run.at("strategy"));
    }

    // Cross-checks the simulator would also reject, surfaced here with field
    // names so a bad document never reaches the run.
    if (std::holds_alternative<pricing::PricingParams>(out.mechanism) &&
        std::holds_alternative<std::vector<sim::ThreePeriodUser>>(out.population)) {
        fail("population", "info_structures requires a three_period mechanism");
    }
    if (std::holds_alternative<multiperiod::ThreePeriodParams>(out.mechanism) &&
        !std::holds_alternative<std::vector<sim::ThreePeriodUser>>(out.population)) {
        fail("population", "a three_period mechanism requires info_structures");
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_csv_number(const std::string& text, const std::filesystem::path& path,
                        std::size_t line_no) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError("users csv " + path.string() + ": line " + std::to_string(line_no) +
                              ": '" + text + "' is not a number");
    }
    return value;
}

}  // namespace

sim::Population load_users_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open users csv: " + path.string());
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw ValidationError("users csv " + path.string() + ": empty file");
    }
    if (!header.empty() && header.back() == '\r') {
        header.pop_back();
    }
    const auto columns = split_csv_line(header);
    const bool two_period = !columns.empty() && columns[0] == "p";
    const bool three_period = columns.size() >= 3 && columns[0] == "p1" && columns[1] == "p21" &&
                              columns[2] == "p22";
    const std::size_t base_cols = three_period ? 3 : 1;
    const bool has_value = columns.size() == base_cols + 1 && columns[base_cols] == "v";
    if ((!two_period && !three_period) || columns.size() != base_cols + (has_value ? 1 : 0)) {
        throw ValidationError("users csv " + path.string() +
                              ": header must be p[,v] or p1,p21,p22[,v]");
    }

    std::vector<sim::TwoPeriodUser> two;
    std::vector<sim::ThreePeriodUser> three;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != columns.size()) {
            throw ValidationError("users csv " + path.string() + ": line " +
                                  std::to_string(line_no) + ": expected " +
                                  std::to_string(columns.size()) + " fields");
        }
        std::optional<double> value;
        if (has_value) {
            value = parse_csv_number(fields[base_cols], path, line_no);
        }
        if (two_period) {
            two.push_back(sim::TwoPeriodUser{parse_csv_number(fields[0], path, line_no), value});
        } else {
            three.push_back(sim::ThreePeriodUser{
                multiperiod::validate_info(parse_csv_number(fields[0], path, line_no),
                                           parse_csv_number(fields[1], path, line_no),
                                           parse_csv_number(fields[2], path, line_no)),
                value});
        }
    }
    if (two_period) {
        if (two.empty()) {
            throw ValidationError("users csv " + path.string() + ": no users");
        }
        return two;
    }
    if (three.empty()) {
        throw ValidationError("users csv " + path.string() + ": no users");
    }
    return three;
}

sim::SimConfig Scenario::to_sim_config() const {
    sim::SimConfig config;
    if (std::holds_alternative<MPeriodMechanism>(mechanism)) {
        throw ValidationError(
            "scenario: mechanism.type m_period cannot be simulated; "
            "supported mechanisms are two_period and three_period");
    }
    if (const auto* two = std::get_if<pricing::PricingParams>(&mechanism)) {
        config.mechanism = *two;
    } else {
        config.mechanism = std::get<multiperiod::ThreePeriodParams>(mechanism);
    }
    config.population = population;
    config.n_users = n_users;
    config.replications = replications;
    config.seed = seed;
    config.cost_model = cost_model;
    config.strategy = strategy;
    return config;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scenario file: " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario: " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_document(doc, path.parent_path());
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario: document is not valid JSON: ") + e.what());
    }
    return parse_document(doc, base_dir);
}

}  // namespace resopt::scenario
