#include "covdiff/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace covdiff::io {

namespace {

using nlohmann::json;

// RFC-4180-style field split with double-quote escaping.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

}  // namespace

DataMatrix load_csv(const std::string& path, bool transpose) {
    std::ifstream in(path);
    if (!in) throw InputError("load_csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::optional<std::vector<std::string>> names;
    std::size_t width = 0;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (rows.empty() && !names) {
            // optional single header row: any non-numeric field
            bool numeric = true;
            double v;
            for (const auto& f : fields)
                if (!parse_double(f, v)) {
                    numeric = false;
                    break;
                }
            if (!numeric) {
                names = std::vector<std::string>();
                for (const auto& f : fields) names->push_back(trim(f));
                width = fields.size();
                continue;
            }
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw InputError("load_csv: " + path + ": ragged row at line " +
                             std::to_string(lineno) + " (" + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(width) + ")");
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            if (!parse_double(fields[c], row[c]))
                throw InputError("load_csv: " + path + ": non-numeric cell at (row " +
                                 std::to_string(rows.size() + 1) + ", column " +
                                 std::to_string(c + 1) + ")");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || width == 0)
        throw ValidationError("load_csv: " + path + ": no data rows");

    DataMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) out.values(r, c) = rows[r][c];
    out.column_names = names;
    if (transpose) {
        out.values = out.values.transpose().eval();
        out.column_names.reset();  // header labeled the variables-in-rows columns
    }
    if (out.n() < 2 || out.p() < 2)
        throw ValidationError("load_csv: " + path + ": need at least 2 rows and 2 columns");
    out.validate();
    return out;
}

void write_csv(const std::string& path, const DataMatrix& m) {
    std::ostringstream out;
    out.precision(17);
    if (m.column_names) {
        for (int c = 0; c < m.p(); ++c)
            out << (c ? "," : "") << (*m.column_names)[c];
        out << "\n";
    }
    for (int r = 0; r < m.n(); ++r) {
        for (int c = 0; c < m.p(); ++c) out << (c ? "," : "") << m.values(r, c);
        out << "\n";
    }
    write_text_file(path, out.str());
}

CovKind parse_cov_kind(const std::string& name) {
    if (name == "M1") return CovKind::M1;
    if (name == "M2") return CovKind::M2;
    if (name == "M3") return CovKind::M3;
    if (name == "M4") return CovKind::M4;
    throw ValidationError("unknown covariance structure: " + name);
}

InnovKind parse_innov_kind(const std::string& name) {
    if (name == "D1") return InnovKind::D1;
    if (name == "D2") return InnovKind::D2;
    if (name == "D3") return InnovKind::D3;
    throw ValidationError("unknown innovation model: " + name);
}

std::string cov_kind_name(CovKind kind) {
    switch (kind) {
        case CovKind::M1: return "M1";
        case CovKind::M2: return "M2";
        case CovKind::M3: return "M3";
        case CovKind::M4: return "M4";
    }
    return "?";
}

std::string innov_kind_name(InnovKind kind) {
    switch (kind) {
        case InnovKind::D1: return "D1";
        case InnovKind::D2: return "D2";
        case InnovKind::D3: return "D3";
    }
    return "?";
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("parse_experiment_config: cannot open " + path);
    ExperimentConfig cfg;
    std::vector<int> n1_list, n2_list;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("parse_experiment_config: " + path + ": expected key = value at line " +
                             std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "cov") {
                cfg.cov = parse_cov_kind(value);
            } else if (key == "innov") {
                cfg.innov = parse_innov_kind(value);
            } else if (key == "p") {
                for (const auto& v : split_list(value)) cfg.p_list.push_back(std::stoi(v));
            } else if (key == "n1") {
                for (const auto& v : split_list(value)) n1_list.push_back(std::stoi(v));
            } else if (key == "n2") {
                for (const auto& v : split_list(value)) n2_list.push_back(std::stoi(v));
            } else if (key == "reps") {
                cfg.reps = std::stoi(value);
            } else if (key == "alpha") {
                cfg.alpha = std::stod(value);
            } else if (key == "B") {
                cfg.B = std::stoi(value);
            } else if (key == "alternative") {
                cfg.alternative = (value == "true" || value == "1" || value == "yes");
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else {
                throw ValidationError("unknown key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw InputError("parse_experiment_config: " + path + ": bad value for '" + key +
                             "' at line " + std::to_string(lineno));
        }
    }
    if (cfg.p_list.empty()) throw ValidationError("parse_experiment_config: missing p");
    if (n1_list.empty() || n1_list.size() != n2_list.size())
        throw ValidationError("parse_experiment_config: n1 and n2 must be lists of equal length");
    if (cfg.reps < 0) throw ValidationError("parse_experiment_config: reps must be >= 0");
    for (std::size_t i = 0; i < n1_list.size(); ++i)
        cfg.sample_sizes.emplace_back(n1_list[i], n2_list[i]);
    return cfg;
}

namespace {

json argmax_json(const TestReport& report, const DataMatrix& x) {
    json arr = json::array();
    if (report.argmax_k < 0) return arr;
    if (x.column_names) {
        arr.push_back(x.name_of(report.argmax_k));
        arr.push_back(x.name_of(report.argmax_l));
    } else {
        arr.push_back(report.argmax_k + 1);
        arr.push_back(report.argmax_l + 1);
    }
    return arr;
}

}  // namespace

std::string test_report_json(const TestReport& bootstrap, const TestReport& clx,
                             const DataMatrix& x, double wall_time_ms) {
    json report = {
        {"schema_version", 1},
        {"method", bootstrap.method},
        {"statistic", bootstrap.statistic},
        {"critical_value", bootstrap.critical_value},
        {"p_value", bootstrap.p_value},
        {"reject", bootstrap.reject},
        {"argmax_pair", argmax_json(bootstrap, x)},
        {"n", bootstrap.n},
        {"m", bootstrap.m},
        {"p", bootstrap.p},
        {"B", bootstrap.B},
        {"alpha", bootstrap.alpha},
        {"seed", bootstrap.seed},
        {"wall_time_ms", wall_time_ms},
        {"clx",
         {{"method", clx.method},
          {"statistic", clx.statistic},
          {"critical_value", clx.critical_value},
          {"p_value", clx.p_value},
          {"reject", clx.reject}}},
    };
    return report.dump(2) + "\n";
}

std::string experiment_table_tsv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out.precision(10);
    out << "cov\tinnov\tp\tn1\tn2\treps\talpha\tB\talternative\t"
           "reject_frac_bootstrap\tse_bootstrap\treject_frac_clx\tse_clx\t"
           "gamma_hat\tclamp_magnitude\telapsed_s\n";
    for (const auto& row : rows) {
        const auto& s = row.summary;
        out << cov_kind_name(row.cov) << '\t' << innov_kind_name(row.innov) << '\t'
            << row.p << '\t' << row.n1 << '\t' << row.n2 << '\t' << s.reps << '\t'
            << row.alpha << '\t' << row.B << '\t' << (s.alternative ? "true" : "false")
            << '\t' << s.frac_bootstrap() << '\t' << s.se(s.frac_bootstrap()) << '\t'
            << s.frac_clx() << '\t' << s.se(s.frac_clx()) << '\t' << s.mean_gamma_hat
            << '\t' << s.clamp_magnitude << '\t' << s.elapsed_seconds << '\n';
    }
    return out.str();
}

std::string dissimilarity_tsv(const Eigen::MatrixXd& d, const DataMatrix& x) {
    std::ostringstream out;
    out.precision(17);
    const int p = static_cast<int>(d.rows());
    for (int c = 0; c < p; ++c) out << '\t' << x.name_of(c);
    out << '\n';
    for (int r = 0; r < p; ++r) {
        out << x.name_of(r);
        for (int c = 0; c < p; ++c) out << '\t' << d(r, c);
        out << '\n';
    }
    return out.str();
}

namespace {

// Ultrametric leaf depth of `node` is parent_height/2; each branch length is
// the depth difference to the child's own height/2.
void newick_node(std::ostringstream& out, const ClusterTree& tree, const DataMatrix& x,
                 int node, double parent_height) {
    const int p = tree.leaves;
    double height = 0.0;
    if (node >= p) {
        const auto& merge = tree.merges[node - p];
        height = merge.height;
        out << '(';
        newick_node(out, tree, x, merge.left, height);
        out << ',';
        newick_node(out, tree, x, merge.right, height);
        out << ')';
    } else {
        out << x.name_of(node);
    }
    out << ':' << (parent_height - height) / 2.0;
}

}  // namespace

std::string to_newick(const ClusterTree& tree, const DataMatrix& x) {
    std::ostringstream out;
    out.precision(17);
    const int p = tree.leaves;
    const int root = p + static_cast<int>(tree.merges.size()) - 1;
    const double root_height = tree.merges.back().height;
    const auto& merge = tree.merges[root - p];
    out << '(';
    newick_node(out, tree, x, merge.left, root_height);
    out << ',';
    newick_node(out, tree, x, merge.right, root_height);
    out << ");\n";
    return out.str();
}

std::string cluster_summary_json(const ClusterPipelineResult& result, double pi, int B,
                                 std::uint64_t seed) {
    json summary = {
        {"schema_version", 1},
        {"s0", result.s0},
        {"S", result.partition.S()},
        {"rejected_blocks", result.rejected_blocks},
        {"pi", pi},
        {"B", B},
        {"seed", seed},
    };
    return summary.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << content;
}

}  // namespace covdiff::io
