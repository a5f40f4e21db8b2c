#pragma once

// Conversion timing over a batch of requests. Samples run sequentially unless
// `parallel` is set; parallel timings include contention and are not comparable.

#include "lmn/pipeline.hpp"

#include <chrono>
#include <future>
#include <sstream>
#include <string>
#include <vector>

namespace lmn::eval {

struct BenchmarkCase {
    std::size_t sample = 0;
    ConversionRequest request;
};

struct BenchmarkRow {
    std::size_t sample = 0;
    Mode mode = Mode::LMN1;
    std::chrono::nanoseconds total{0};
    std::chrono::nanoseconds llm{0};
    bool ok = true;
    std::string error;
};

inline BenchmarkRow run_case(const BenchmarkCase& c, const CompletionBackend& backend) {
    BenchmarkRow row;
    row.sample = c.sample;
    row.mode = c.request.mode;
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto out = run_conversion(c.request, backend);
        row.total = out.timing.total;
        row.llm = out.timing.llm;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.total = std::chrono::steady_clock::now() - start;
    }
    return row;
}

inline std::vector<BenchmarkRow> benchmark_conversion(const std::vector<BenchmarkCase>& cases,
                                                      const CompletionBackend& backend, bool parallel = false) {
    std::vector<BenchmarkRow> rows;
    rows.reserve(cases.size());
    if (!parallel) {
        for (const auto& c : cases) rows.push_back(run_case(c, backend));
        return rows;
    }
    std::vector<std::future<BenchmarkRow>> pending;
    for (const auto& c : cases) pending.push_back(std::async(std::launch::async, [&c, &backend] { return run_case(c, backend); }));
    for (auto& f : pending) rows.push_back(f.get());
    return rows;
}

inline std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream os;
    os << "sample,mode,total_ms,llm_ms,status,error\n";
    os.setf(std::ios::fixed);
    os.precision(6);
    for (const auto& r : rows) {
        os << r.sample << ',' << to_string(r.mode) << ','
           << std::chrono::duration<double, std::milli>(r.total).count() << ','
           << std::chrono::duration<double, std::milli>(r.llm).count() << ',' << (r.ok ? "ok" : "failed") << ','
           << csv_escape(r.error) << '\n';
    }
    return os.str();
}

} // namespace lmn::eval
