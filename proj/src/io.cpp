#include "kftune/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kftune {

namespace {

nlohmann::json vector_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// JSON has no inf/nan; those become null.
nlohmann::json number_json(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json bounds_json(const ChiSquareBounds& b) {
    return {{"lower", b.lower}, {"upper", b.upper}, {"alpha", b.alpha}, {"dof", b.dof_per_sample}, {"N", b.N}};
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::out_of_range("no CSV column named '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    return parse_double(rows.at(row).at(column(name)));
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string raw;
    bool first = true;
    while (std::getline(in, raw)) {
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = raw.find(',', start);
            cells.push_back(raw.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw std::runtime_error("CSV row width differs from header");
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

CsvTable history_table(const TuneResult& result, const std::vector<std::string>& param_names) {
    CsvTable t;
    t.header = {"iter", "phase"};
    for (const auto& n : param_names) t.header.push_back(n);
    t.header.push_back("y");
    t.header.push_back("best_so_far");
    for (std::size_t i = 0; i < param_names.size(); ++i) t.header.push_back("ls_" + std::to_string(i));
    t.header.push_back("signal_variance");

    for (const auto& h : result.history) {
        std::vector<std::string> row{std::to_string(h.iter), h.phase};
        for (Eigen::Index i = 0; i < h.q.size(); ++i) row.push_back(format_double(h.q[i]));
        row.push_back(format_double(h.y));
        row.push_back(format_double(h.best_so_far));
        for (std::size_t i = 0; i < param_names.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            row.push_back(idx < h.lengthscales.size() ? format_double(h.lengthscales[idx]) : "nan");
        }
        row.push_back(h.lengthscales.size() > 0 ? format_double(h.signal_variance) : "nan");
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable runlog_table(const RunLog& log) {
    CsvTable t;
    if (log.empty()) return t;
    const auto& first = log.front();
    const auto nx = first.estimate.mean.size();
    const auto nz = first.innovation.innovation.size();
    const bool truth = first.truth_state.size() > 0;
    t.header.push_back("k");
    if (truth) {
        for (Eigen::Index i = 0; i < nx; ++i) t.header.push_back("truth_" + std::to_string(i));
    }
    for (Eigen::Index i = 0; i < nx; ++i) t.header.push_back("est_" + std::to_string(i));
    for (Eigen::Index j = 0; j < nz; ++j) t.header.push_back("innov_" + std::to_string(j));
    for (Eigen::Index j = 0; j < nz; ++j) t.header.push_back("S_" + std::to_string(j) + std::to_string(j));

    for (std::size_t k = 0; k < log.size(); ++k) {
        const auto& s = log[k];
        std::vector<std::string> row{std::to_string(k + 1)};
        if (truth) {
            for (Eigen::Index i = 0; i < nx; ++i) row.push_back(format_double(s.truth_state[i]));
        }
        for (Eigen::Index i = 0; i < nx; ++i) row.push_back(format_double(s.estimate.mean[i]));
        for (Eigen::Index j = 0; j < nz; ++j) row.push_back(format_double(s.innovation.innovation[j]));
        for (Eigen::Index j = 0; j < nz; ++j) row.push_back(format_double(s.innovation.innov_cov(j, j)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

nlohmann::json to_json(const ConsistencyReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        const auto& s = e.stats;
        entries.push_back({
            {"dt", e.dt},
            {"N", s.N},
            {"T", s.T},
            {"n_x", s.n_x},
            {"n_z", s.n_z},
            {"eps_x_tilde", number_json(s.eps_x_tilde)},
            {"eps_z_tilde", number_json(s.eps_z_tilde)},
            {"S_x_tilde", number_json(s.S_x_tilde)},
            {"S_z_tilde", number_json(s.S_z_tilde)},
            {"J_nis", number_json(e.j_nis)},
            {"C_nis", number_json(e.c_nis)},
            {"V_nis", number_json(e.v_nis)},
            {"J_nees", number_json(e.j_nees)},
            {"C_nees", number_json(e.c_nees)},
            {"V_nees", number_json(e.v_nees)},
            {"nis_bounds", bounds_json(e.nis_bounds)},
            {"nees_bounds", bounds_json(e.nees_bounds)},
            {"nis_in_bounds_fraction", number_json(e.nis_in_bounds)},
            {"nees_in_bounds_fraction", number_json(e.nees_in_bounds)},
            {"nis_verdict", to_string(e.nis_verdict)},
            {"nees_verdict", s.has_nees ? to_string(e.nees_verdict) : "unavailable"},
            {"pass", e.pass},
        });
    }
    return {{"alpha", report.alpha}, {"entries", entries}};
}

nlohmann::json to_json(const TuneResult& result, const TuneProblem& problem,
                       const std::vector<std::string>& param_names) {
    nlohmann::json j;
    j["method"] = result.method;
    j["system"] = problem.system;
    j["cost"] = to_string(problem.cost);
    j["reducer"] = to_string(problem.reducer);
    j["dt_list"] = problem.dt_list;
    j["param_names"] = param_names;
    j["truth_params"] = vector_json(problem.truth_params);
    j["q_star"] = vector_json(result.q_star);
    j["y_star"] = number_json(result.y_star);
    j["n_evaluations"] = result.history.size();
    j["divergences"] = result.divergences;
    if (result.surrogate_final) {
        const auto& s = *result.surrogate_final;
        j["surrogate"] = {{"lengthscales", vector_json(s.kernel().lengthscales)},
                          {"signal_variance", s.kernel().signal_variance},
                          {"dof", number_json(s.dof())},
                          {"mode", s.mode() == SurrogateMode::StudentT ? "student_t" : "gaussian"}};
    }
    j["wall_report"] = {{"cost_seconds", result.wall_report.cost_seconds},
                        {"fit_seconds", result.wall_report.fit_seconds},
                        {"acquisition_seconds", result.wall_report.acquisition_seconds}};
    return j;
}

}  // namespace kftune
