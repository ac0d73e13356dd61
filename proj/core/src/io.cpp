#include "dgrkit/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dgrkit/regulator.hpp"

namespace dgr {

using nlohmann::json;

// --- logging -------------------------------------------------------------

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* raw = std::getenv("DGRKIT_LOG");
        if (!raw) return LogLevel::Error;
        const std::string value(raw);
        if (value == "debug") return LogLevel::Debug;
        if (value == "info") return LogLevel::Info;
        return LogLevel::Error;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::Info) {
        std::cerr << "[dgrkit] " << message << "\n";
    }
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::Debug) {
        std::cerr << "[dgrkit:debug] " << message << "\n";
    }
}

// --- parsing helpers -------------------------------------------------------

namespace {

[[noreturn]] void rethrow_with_position(const std::string& text,
                                        const json::parse_error& err) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min(err.byte, text.size());
    for (std::size_t i = 0; i + 1 <= stop && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    throw ParseError("parse error at line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": " + err.what());
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& err) {
        rethrow_with_position(text, err);
    }
}

Eigen::MatrixXd matrix_from_json(const json& node, const std::string& name) {
    if (!node.is_array() || node.empty()) {
        throw ParseError(name + " must be a non-empty nested array");
    }
    const std::size_t rows = node.size();
    std::size_t cols = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!node[i].is_array() || node[i].empty()) {
            throw ParseError(name + " row " + std::to_string(i) +
                             " must be a non-empty array");
        }
        if (i == 0) {
            cols = node[i].size();
        } else if (node[i].size() != cols) {
            throw ParseError(name + " rows have inconsistent lengths");
        }
    }
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (!node[i][j].is_number()) {
                throw ParseError(name + "[" + std::to_string(i) + "][" +
                                 std::to_string(j) + "] is not a number");
            }
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                node[i][j].get<double>();
        }
    }
    return M;
}

Eigen::VectorXd vector_from_json(const json& node, const std::string& name) {
    if (!node.is_array() || node.empty()) {
        throw ParseError(name + " must be a non-empty array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number()) {
            throw ParseError(name + "[" + std::to_string(i) + "] is not a number");
        }
        v(static_cast<Eigen::Index>(i)) = node[i].get<double>();
    }
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

LtiSystem system_from_json(const json& node) {
    if (!node.is_object()) {
        throw ParseError("system description must be a JSON object");
    }
    for (const auto& [key, value] : node.items()) {
        (void)value;
        if (key != "A" && key != "B" && key != "noise_std" && key != "labels") {
            throw ParseError("unknown system key: " + key);
        }
    }
    if (!node.contains("A") || !node.contains("B")) {
        throw ParseError("system description needs both A and B");
    }
    LtiSystem sys;
    sys.A = matrix_from_json(node["A"], "A");
    sys.B = matrix_from_json(node["B"], "B");
    if (node.contains("noise_std")) {
        if (!node["noise_std"].is_number()) {
            throw ParseError("noise_std must be a number");
        }
        sys.noise_std = node["noise_std"].get<double>();
    }
    if (sys.A.rows() != sys.A.cols()) {
        throw ParseError("A must be square");
    }
    if (sys.B.rows() != sys.A.rows()) {
        throw ParseError("B must have as many rows as A");
    }
    try {
        sys.validate();
    } catch (const InvalidInput& err) {
        throw ParseError(err.what());
    }
    return sys;
}

}  // namespace

LtiSystem parse_system_json(const std::string& text) {
    return system_from_json(parse_json_text(text));
}

LtiSystem load_system_file(const std::string& path) {
    return parse_system_json(read_file(path));
}

ScenarioConfig parse_scenario_json(const std::string& text,
                                   const std::string& base_dir) {
    const json node = parse_json_text(text);
    if (!node.is_object()) {
        throw ParseError("scenario must be a JSON object");
    }
    static const char* known[] = {"system",      "system_file", "controller",
                                  "steps",       "seed",        "alpha",
                                  "noise_std",   "perturb_std", "x0",
                                  "x0_std",      "switch_step", "lqr_Q",
                                  "lqr_R"};
    for (const auto& [key, value] : node.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ParseError("unknown scenario key: " + key);
    }

    ScenarioConfig cfg;
    if (node.contains("system") == node.contains("system_file")) {
        throw ParseError("scenario needs exactly one of system / system_file");
    }
    if (node.contains("system")) {
        cfg.system = system_from_json(node["system"]);
    } else {
        if (!node["system_file"].is_string()) {
            throw ParseError("system_file must be a string");
        }
        const std::filesystem::path p =
            std::filesystem::path(base_dir) / node["system_file"].get<std::string>();
        cfg.system = load_system_file(p.string());
    }
    cfg.noise_std = cfg.system.noise_std;

    if (!node.contains("controller") || !node["controller"].is_string()) {
        throw ParseError("scenario needs a controller name");
    }
    try {
        cfg.controller = controller_from_name(node["controller"].get<std::string>());
    } catch (const InvalidInput& err) {
        throw ParseError(err.what());
    }
    if (!node.contains("steps") || !node["steps"].is_number_integer()) {
        throw ParseError("scenario needs an integer steps count");
    }
    cfg.steps = node["steps"].get<int>();

    auto number = [&node](const char* key, double fallback) {
        if (!node.contains(key)) return fallback;
        if (!node[key].is_number()) {
            throw ParseError(std::string(key) + " must be a number");
        }
        return node[key].get<double>();
    };
    cfg.alpha = number("alpha", 0.0);
    cfg.noise_std = number("noise_std", cfg.noise_std);
    cfg.perturb_std = number("perturb_std", 0.0);
    if (node.contains("seed")) {
        if (!node["seed"].is_number_integer()) {
            throw ParseError("seed must be an integer");
        }
        cfg.seed = node["seed"].get<std::uint64_t>();
    }
    if (node.contains("switch_step")) {
        if (!node["switch_step"].is_number_integer()) {
            throw ParseError("switch_step must be an integer");
        }
        cfg.switch_step = node["switch_step"].get<int>();
    }
    if (node.contains("x0") && node.contains("x0_std")) {
        throw ParseError("x0 and x0_std are mutually exclusive");
    }
    if (node.contains("x0")) {
        cfg.x0 = vector_from_json(node["x0"], "x0");
    }
    cfg.x0_std = number("x0_std", cfg.x0_std);
    if (node.contains("lqr_Q")) cfg.lqr_Q = matrix_from_json(node["lqr_Q"], "lqr_Q");
    if (node.contains("lqr_R")) cfg.lqr_R = matrix_from_json(node["lqr_R"], "lqr_R");
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    const std::filesystem::path p(path);
    const std::string base = p.has_parent_path() ? p.parent_path().string() : ".";
    return parse_scenario_json(read_file(path), base);
}

// --- serialization -----------------------------------------------------

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

std::string json_escape(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

// Flat JSON object writer with full control over number formatting.
class JsonWriter {
public:
    void field(const std::string& key, double value) {
        add(key, std::isfinite(value) ? format_double(value) : "null");
    }
    void field(const std::string& key, int value) { add(key, std::to_string(value)); }
    void field(const std::string& key, std::uint64_t value) {
        add(key, std::to_string(value));
    }
    void field(const std::string& key, bool value) { add(key, value ? "true" : "false"); }
    void field(const std::string& key, const std::string& value) {
        add(key, "\"" + json_escape(value) + "\"");
    }
    void raw(const std::string& key, const std::string& rendered) { add(key, rendered); }

    std::string str() const { return "{\n" + body_ + "\n}\n"; }

private:
    void add(const std::string& key, const std::string& rendered) {
        if (!body_.empty()) body_ += ",\n";
        body_ += "  \"" + json_escape(key) + "\": " + rendered;
    }
    std::string body_;
};

std::string render_matrix(const Eigen::MatrixXd& M) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        if (i) out += ", ";
        out += "[";
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out += ", ";
            out += format_double(M(i, j));
        }
        out += "]";
    }
    return out + "]";
}

}  // namespace

std::string to_json(const RegularizabilityReport& report) {
    JsonWriter w;
    w.field("rho_A", report.rho_A);
    w.field("rho_Atilde", report.rho_Atilde);
    w.field("atilde_norm", report.atilde_norm);
    w.field("regularizable", report.regularizable);
    w.field("contractible", report.contractible);
    w.field("marginal", report.marginal);
    w.field("stabilizable", report.stabilizable);
    w.field("detectable_transpose", report.detectable_transpose);
    w.field("certificate_present", report.lyapunov_P.has_value());
    return w.str();
}

std::string to_json(const RunSummary& summary) {
    JsonWriter w;
    w.field("controller", summary.controller);
    w.field("steps", summary.steps);
    w.field("seed", summary.seed);
    w.field("alpha", summary.alpha);
    w.field("peak_norm", summary.peak_norm);
    w.field("final_norm", summary.final_norm);
    w.field("first_full_rank_step", summary.first_full_rank_step);
    w.field("bound_violations", summary.bound_violations);
    w.field("overflow_truncated", summary.overflow_truncated);
    w.field("switch_step", summary.switch_step);
    w.field("dare_failed", summary.dare_failed);
    w.field("identification_error", summary.identification_error);
    w.field("rho_closed_loop", summary.rho_closed_loop);
    return w.str();
}

std::string to_json(const InstabilityEstimate& estimate) {
    JsonWriter w;
    w.field("t", estimate.order);
    w.field("estimate", estimate.value);
    w.field("lower", estimate.analytic_lower);
    w.field("upper", estimate.analytic_upper);
    w.raw("frame", render_matrix(estimate.frame));
    return w.str();
}

std::string to_csv(const TrajectoryLog& log) {
    std::string out = "t";
    for (Eigen::Index i = 1; i <= log.state_dim; ++i) {
        out += ",x_" + std::to_string(i);
    }
    for (Eigen::Index i = 1; i <= log.input_dim; ++i) {
        out += ",u_" + std::to_string(i);
    }
    out += ",norm_x,norm_z,rank_X,bound,phase\n";
    for (const auto& row : log.rows) {
        out += std::to_string(row.t);
        for (Eigen::Index i = 0; i < log.state_dim; ++i) {
            out += "," + format_double(row.x(i));
        }
        for (Eigen::Index i = 0; i < log.input_dim; ++i) {
            out += "," + format_double(row.u(i));
        }
        out += "," + format_double(row.norm_x);
        out += "," + format_double(row.norm_z);
        out += "," + std::to_string(row.rank_X);
        out += ",";
        if (row.bound) out += format_double(*row.bound);
        out += "," + row.phase + "\n";
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return value;
    } catch (const std::exception&) {
        throw ParseError("trajectory CSV line " + std::to_string(line_no) +
                         ": bad number '" + cell + "'");
    }
}

}  // namespace

TrajectoryLog trajectory_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("trajectory CSV is empty");
    }
    const std::vector<std::string> header = split_csv_line(line);
    Eigen::Index n = 0, m = 0;
    std::size_t at = 1;
    if (header.empty() || header[0] != "t") {
        throw ParseError("trajectory CSV header must start with t");
    }
    while (at < header.size() && header[at] == "x_" + std::to_string(n + 1)) {
        ++n;
        ++at;
    }
    while (at < header.size() && header[at] == "u_" + std::to_string(m + 1)) {
        ++m;
        ++at;
    }
    const std::vector<std::string> tail = {"norm_x", "norm_z", "rank_X", "bound",
                                           "phase"};
    for (const auto& name : tail) {
        if (at >= header.size() || header[at] != name) {
            throw ParseError("trajectory CSV header: expected column " + name);
        }
        ++at;
    }
    if (at != header.size() || n == 0 || m == 0) {
        throw ParseError("trajectory CSV header does not match the schema");
    }

    TrajectoryLog log;
    log.state_dim = n;
    log.input_dim = m;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != static_cast<std::size_t>(n + m) + 6) {
            throw ParseError("trajectory CSV line " + std::to_string(line_no) +
                             ": wrong cell count");
        }
        TrajectoryRow row;
        std::size_t c = 0;
        row.t = static_cast<int>(parse_number(cells[c++], line_no));
        row.x.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) row.x(i) = parse_number(cells[c++], line_no);
        row.u.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) row.u(i) = parse_number(cells[c++], line_no);
        row.norm_x = parse_number(cells[c++], line_no);
        row.norm_z = parse_number(cells[c++], line_no);
        row.rank_X = static_cast<Eigen::Index>(parse_number(cells[c++], line_no));
        if (!cells[c].empty()) {
            row.bound = parse_number(cells[c], line_no);
        }
        ++c;
        row.phase = cells[c];
        log.rows.push_back(std::move(row));
    }
    return log;
}

std::string bounds_csv(const LtiSystem& sys, int max_order, double alpha,
                       const TrajectoryLog* trajectory) {
    sys.validate();
    std::vector<double> L;
    if (trajectory && !trajectory->rows.empty()) {
        std::vector<Eigen::VectorXd> states;
        states.reserve(trajectory->rows.size());
        for (const auto& row : trajectory->rows) states.push_back(row.x);
        const RealizedDirections dirs = realized_directions(states);
        L = trajectory_bound_series(sys, alpha, dirs.zbar, dirs.wbar).L;
    }

    std::string out = "t,M_lower,M_upper,L\n";
    for (int t = 1; t <= max_order; ++t) {
        const InstabilityBoundPair pair = instability_bounds(sys.A, t);
        out += std::to_string(t);
        out += "," + format_double(pair.lower);
        out += "," + format_double(pair.upper);
        out += ",";
        if (static_cast<std::size_t>(t) < L.size()) {
            out += format_double(L[static_cast<std::size_t>(t)]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace dgr
