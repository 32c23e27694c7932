#include "graphlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace graphlearn {

namespace fs = std::filesystem;

namespace {

std::ofstream open_write(const fs::path& file)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw DatasetError("cannot write " + file.string());
    return out;
}

std::ifstream open_read(const fs::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw DatasetError("cannot read " + file.string());
    return in;
}

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Reads a headed CSV with a fixed column count; calls row(fields, line_no).
template <class Row>
void read_csv(const fs::path& file, std::string_view header, std::size_t columns, Row&& row)
{
    auto in = open_read(file);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw DatasetError(file.string() + ": expected header '" + std::string(header) + "'");
    std::size_t line_no = 1;
    std::vector<std::string> fields;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        fields.clear();
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        if (fields.size() != columns)
            throw DatasetError(file.string() + " line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields");
        try {
            row(fields);
        } catch (const DatasetError&) {
            throw;
        } catch (const std::exception& e) {
            throw DatasetError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

long long parse_int(const std::string& s)
{
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("bad integer '" + s + "'");
    return v;
}

double parse_real(const std::string& s)
{
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

int parse_node(const std::string& s, int n)
{
    const long long v = parse_int(s);
    if (v < 0 || v >= n)
        throw std::invalid_argument("node id " + s + " out of range");
    return static_cast<int>(v);
}

}  // namespace

void save_graph(const fs::path& file, const Graph& g)
{
    auto out = open_write(file);
    write_edge_list(out, g);
}

Graph load_graph(const fs::path& file, std::optional<int> n)
{
    auto in = open_read(file);
    try {
        return read_edge_list(in, n);
    } catch (const std::exception& e) {
        throw DatasetError(file.string() + ": " + e.what());
    }
}

void save_baselines(const fs::path& file, std::span<const double> mu)
{
    auto out = open_write(file);
    out << "node,mu\n";
    for (std::size_t i = 0; i < mu.size(); ++i)
        out << i << ',' << num(mu[i]) << '\n';
}

std::vector<double> load_baselines(const fs::path& file)
{
    std::vector<std::pair<long long, double>> rows;
    read_csv(file, "node,mu", 2, [&](const std::vector<std::string>& f) {
        rows.emplace_back(parse_int(f[0]), parse_real(f[1]));
    });
    std::vector<double> mu(rows.size(), -1.0);
    for (const auto& [node, value] : rows) {
        if (node < 0 || node >= static_cast<long long>(rows.size()) || mu[static_cast<std::size_t>(node)] >= 0.0)
            throw DatasetError(file.string() + ": node ids must be 0..N-1, each once");
        if (!(value > 0.0))
            throw DatasetError(file.string() + ": baseline of node " + std::to_string(node) + " must be positive");
        mu[static_cast<std::size_t>(node)] = value;
    }
    if (mu.empty())
        throw DatasetError(file.string() + ": no baselines");
    return mu;
}

void save_snapshots(const fs::path& file, std::span<const Snapshot> snapshots)
{
    auto out = open_write(file);
    out << "example,node,count\n";
    for (std::size_t j = 0; j < snapshots.size(); ++j)
        for (std::size_t i = 0; i < snapshots[j].counts.size(); ++i)
            out << j << ',' << i << ',' << num(snapshots[j].counts[i]) << '\n';
}

std::vector<Snapshot> load_snapshots(const fs::path& file, std::span<const double> mu)
{
    const int n = static_cast<int>(mu.size());
    std::vector<std::vector<double>> counts;
    read_csv(file, "example,node,count", 3, [&](const std::vector<std::string>& f) {
        const long long j = parse_int(f[0]);
        if (j < 0)
            throw std::invalid_argument("negative example id");
        const int node = parse_node(f[1], n);
        const double x = parse_real(f[2]);
        if (!(x >= 0.0))
            throw std::invalid_argument("count must be non-negative");
        if (static_cast<std::size_t>(j) >= counts.size())
            counts.resize(static_cast<std::size_t>(j) + 1);
        auto& row = counts[static_cast<std::size_t>(j)];
        if (row.empty())
            row.assign(mu.size(), -1.0);
        if (row[static_cast<std::size_t>(node)] >= 0.0)
            throw std::invalid_argument("duplicate row for example " + f[0] + " node " + f[1]);
        row[static_cast<std::size_t>(node)] = x;
    });
    if (counts.empty())
        throw DatasetError(file.string() + ": no snapshots");
    std::vector<Snapshot> out;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j].empty() || std::any_of(counts[j].begin(), counts[j].end(), [](double x) { return x < 0.0; }))
            throw DatasetError(file.string() + ": example " + std::to_string(j) + " is missing nodes");
        Snapshot s;
        s.counts = std::move(counts[j]);
        s.baselines.assign(mu.begin(), mu.end());
        out.push_back(std::move(s));
    }
    return out;
}

void save_labels(const fs::path& file, std::span<const std::vector<int>> labels)
{
    auto out = open_write(file);
    out << "example,node\n";
    for (std::size_t j = 0; j < labels.size(); ++j)
        for (int v : labels[j])
            out << j << ',' << v << '\n';
}

std::vector<std::vector<int>> load_labels(const fs::path& file, std::size_t examples, int n)
{
    std::vector<std::vector<int>> labels(examples);
    read_csv(file, "example,node", 2, [&](const std::vector<std::string>& f) {
        const long long j = parse_int(f[0]);
        if (j < 0 || static_cast<std::size_t>(j) >= examples)
            throw std::invalid_argument("example id " + f[0] + " out of range");
        labels[static_cast<std::size_t>(j)].push_back(parse_node(f[1], n));
    });
    for (auto& l : labels)
        std::sort(l.begin(), l.end());
    return labels;
}

void save_significance(const fs::path& file, const GraphSequence& seq, const SignificanceCurve& curve)
{
    auto out = open_write(file);
    out << "m,fnorm,mu,sigma,z\n";
    for (std::size_t m = 1; m < seq.fnorm.size(); ++m)
        out << m << ',' << num(seq.fnorm[m]) << ',' << num(curve.mu[m]) << ',' << num(curve.sigma[m]) << ','
            << num(curve.z[m]) << '\n';
}

void save_json(const fs::path& file, const nlohmann::ordered_json& j)
{
    auto out = open_write(file);
    out << j.dump(2) << '\n';
}

nlohmann::json load_json(const fs::path& file)
{
    auto in = open_read(file);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(file.string() + ": " + e.what());
    }
}

void write_dataset(const fs::path& dir, const Dataset& ds)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw DatasetError("cannot create " + dir.string() + ": " + ec.message());
    save_graph(dir / "graph.edges", ds.graph);
    if (ds.graph.coordinates()) {
        auto out = open_write(dir / "coordinates.txt");
        write_coordinates(out, ds.graph);
    }
    save_baselines(dir / "baselines.csv", ds.mu);
    save_snapshots(dir / "snapshots.csv", ds.snapshots);
    save_labels(dir / "labels.csv", ds.labels);
    save_json(dir / "meta.json", ds.meta);
}

Dataset read_dataset(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw DatasetError("dataset directory " + dir.string() + " does not exist");
    Dataset ds;
    ds.mu = load_baselines(dir / "baselines.csv");
    const int n = static_cast<int>(ds.mu.size());
    ds.graph = load_graph(dir / "graph.edges", n);
    if (fs::exists(dir / "coordinates.txt")) {
        auto in = open_read(dir / "coordinates.txt");
        try {
            ds.graph.set_coordinates(read_coordinates(in, n));
        } catch (const std::exception& e) {
            throw DatasetError((dir / "coordinates.txt").string() + ": " + e.what());
        }
    }
    ds.snapshots = load_snapshots(dir / "snapshots.csv", ds.mu);
    if (fs::exists(dir / "labels.csv"))
        ds.labels = load_labels(dir / "labels.csv", ds.snapshots.size(), n);
    else
        ds.labels.assign(ds.snapshots.size(), {});
    if (fs::exists(dir / "meta.json")) {
        const auto meta = load_json(dir / "meta.json");
        ds.meta = nlohmann::ordered_json::parse(meta.dump());
    }
    return ds;
}

}  // namespace graphlearn
