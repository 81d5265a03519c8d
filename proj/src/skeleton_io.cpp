#include "pdmp/skeleton_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pdmp {

std::string format_full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

} // namespace

void write_skeleton_csv(const Skeleton& skeleton, const std::string& path) {
    auto f = open_out(path);
    const std::size_t d = skeleton.events.empty() ? 0 : skeleton.events.front().state.dimension();
    f << "time";
    for (std::size_t i = 1; i <= d; ++i) f << ",x_" << i;
    for (std::size_t i = 1; i <= d; ++i) f << ",v_" << i;
    f << "\n";
    for (const auto& e : skeleton.events) {
        f << format_full_precision(e.time);
        for (double x : e.state.position) f << ',' << format_full_precision(x);
        for (double v : e.state.velocity) f << ',' << format_full_precision(v);
        f << "\n";
    }
}

Skeleton read_skeleton_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty skeleton file: " + path);
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "time" || (header.size() - 1) % 2 != 0)
        throw std::runtime_error("bad skeleton header in " + path);
    const std::size_t d = (header.size() - 1) / 2;

    Skeleton skel;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 1 + 2 * d)
            throw std::runtime_error("bad skeleton row in " + path);
        SkeletonEvent e;
        e.time = std::stod(fields[0]);
        e.state.position.resize(d);
        e.state.velocity.resize(d);
        for (std::size_t i = 0; i < d; ++i) e.state.position[i] = std::stod(fields[1 + i]);
        for (std::size_t i = 0; i < d; ++i) e.state.velocity[i] = std::stod(fields[1 + d + i]);
        skel.events.push_back(std::move(e));
    }
    if (!skel.events.empty()) skel.final_time = skel.events.back().time;
    return skel;
}

void write_stats_json(const ThinningStats& stats, const std::string& path) {
    nlohmann::json j{{"proposals", stats.proposals},
                     {"acceptances", stats.acceptances},
                     {"clock_draws", stats.clock_draws},
                     {"gradient_evaluations", stats.gradient_evaluations}};
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

void write_samples_csv(const std::vector<std::vector<double>>& samples, const std::string& path) {
    auto f = open_out(path);
    const std::size_t d = samples.empty() ? 0 : samples.front().size();
    for (std::size_t i = 1; i <= d; ++i) f << (i > 1 ? "," : "") << "x_" << i;
    f << "\n";
    for (const auto& row : samples) {
        for (std::size_t i = 0; i < row.size(); ++i)
            f << (i > 0 ? "," : "") << format_full_precision(row[i]);
        f << "\n";
    }
}

std::vector<std::vector<double>> read_samples_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty samples file: " + path);
    std::vector<std::vector<double>> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& s : fields) row.push_back(std::stod(s));
        out.push_back(std::move(row));
    }
    return out;
}

void write_dirichlet_dataset_json(const DirichletPosterior& posterior,
                                  const std::vector<double>& p, const std::string& path) {
    nlohmann::json j{{"p", p},
                     {"prior", posterior.prior()},
                     {"counts", posterior.counts()},
                     {"batches", posterior.batches()}};
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

DirichletPosterior read_dirichlet_dataset_json(const std::string& path,
                                               std::vector<double>* p_out) {
    auto f = open_in(path);
    nlohmann::json j;
    f >> j;
    if (p_out) *p_out = j.value("p", std::vector<double>{});
    return DirichletPosterior(j.at("counts").get<std::vector<double>>(),
                              j.at("prior").get<std::vector<double>>(),
                              j.at("batches").get<std::vector<std::vector<double>>>());
}

} // namespace pdmp
