#include "scaffold/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace scaffold {

namespace {

// Parses an integer at text[pos...]; advances pos past it on success.
bool parse_int(const std::string& text, size_t& pos, long& out) {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin) return false;
    pos += static_cast<size_t>(end - begin);
    out = v;
    return true;
}

bool parse_real(const std::string& text, size_t& pos, double& out) {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) return false;
    pos += static_cast<size_t>(end - begin);
    out = v;
    return true;
}

void skip_ws(const std::string& text, size_t& pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
}

bool expect(const std::string& text, size_t& pos, char c) {
    skip_ws(text, pos);
    if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

std::string shortest_repr(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int decimals_for_width(double width) {
    const std::string repr = shortest_repr(width);
    const size_t dot = repr.find('.');
    if (dot == std::string::npos) return 1;
    int decimals = static_cast<int>(repr.size() - dot - 1);
    return std::clamp(decimals, 1, 12);
}

}  // namespace

GridCoord parse_grid_answer(const std::string& text) {
    for (size_t pos = text.find('['); pos != std::string::npos;
         pos = text.find('[', pos + 1)) {
        size_t p = pos + 1;
        long u = 0, v = 0;
        skip_ws(text, p);
        if (!parse_int(text, p, u)) continue;
        if (!expect(text, p, ',')) continue;
        skip_ws(text, p);
        if (!parse_int(text, p, v)) continue;
        if (!expect(text, p, ']')) continue;
        if (u < 0 || u > 9 || v < 0 || v > 9)
            throw Error("grid answer: cell [" + std::to_string(u) + ", " +
                        std::to_string(v) + "] out of range [0,9]");
        return {static_cast<int>(u), static_cast<int>(v)};
    }
    throw Error("grid answer: no bracketed integer pair found");
}

Box7DoF parse_box7_answer(const std::string& text) {
    for (size_t pos = text.find('('); pos != std::string::npos;
         pos = text.find('(', pos + 1)) {
        size_t p = pos + 1;
        double vals[7];
        bool ok = true;
        for (int i = 0; i < 7 && ok; ++i) {
            skip_ws(text, p);
            if (i > 0 && !expect(text, p, ',')) {
                ok = false;
                break;
            }
            skip_ws(text, p);
            if (!parse_real(text, p, vals[i])) ok = false;
        }
        if (!ok || !expect(text, p, ')')) continue;
        if (vals[3] <= 0.0 || vals[4] <= 0.0 || vals[5] <= 0.0)
            throw Error("box answer: sizes must be > 0");
        Box7DoF box;
        box.center = {vals[0], vals[1], vals[2]};
        box.size = {vals[3], vals[4], vals[5]};
        box.yaw = wrap_yaw(vals[6]);
        return box;
    }
    throw Error("box answer: no 7-tuple of reals found");
}

EvalSummary summarize_errors(std::vector<double> errors, double bin_width) {
    if (errors.empty()) throw Error("summarize_errors: empty sample");
    if (!(bin_width > 0.0)) throw Error("summarize_errors: bin width must be > 0");
    for (double e : errors)
        if (!std::isfinite(e) || e < 0.0)
            throw Error("summarize_errors: errors must be finite and non-negative");

    EvalSummary summary;
    summary.count = errors.size();
    summary.bin_width = bin_width;

    double sum = 0.0;
    for (double e : errors) sum += e;
    summary.mean = sum / static_cast<double>(errors.size());

    std::sort(errors.begin(), errors.end());
    const size_t n = errors.size();
    summary.median = n % 2 == 1 ? errors[n / 2] : (errors[n / 2 - 1] + errors[n / 2]) / 2.0;

    const size_t max_bin = static_cast<size_t>(std::floor(errors.back() / bin_width));
    summary.histogram.assign(max_bin + 1, {0.0, 0});
    for (size_t k = 0; k <= max_bin; ++k)
        summary.histogram[k].first = static_cast<double>(k) * bin_width;
    for (double e : errors) {
        const size_t k = std::min(max_bin, static_cast<size_t>(std::floor(e / bin_width)));
        ++summary.histogram[k].second;
    }
    return summary;
}

EvalSummary cogmap_error(const std::vector<GridCoord>& preds,
                         const std::vector<GridCoord>& gts, double bin_width) {
    if (preds.size() != gts.size()) throw Error("cogmap_error: length mismatch");
    if (preds.empty()) throw Error("cogmap_error: empty sample");
    std::vector<double> errors;
    errors.reserve(preds.size());
    for (size_t i = 0; i < preds.size(); ++i)
        errors.push_back(std::hypot(preds[i].u - gts[i].u, preds[i].v - gts[i].v));
    return summarize_errors(std::move(errors), bin_width);
}

GroundingErrorSummary grounding_errors(const std::vector<Box7DoF>& preds,
                                       const std::vector<Box7DoF>& gts,
                                       double center_bin, double size_bin, double yaw_bin) {
    if (preds.size() != gts.size()) throw Error("grounding_errors: length mismatch");
    if (preds.empty()) throw Error("grounding_errors: empty sample");

    std::vector<double> center_err, size_err, yaw_err;
    center_err.reserve(preds.size());
    size_err.reserve(preds.size());
    yaw_err.reserve(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) {
        center_err.push_back((preds[i].center - gts[i].center).norm());
        size_err.push_back((std::abs(preds[i].size.l - gts[i].size.l) +
                            std::abs(preds[i].size.w - gts[i].size.w) +
                            std::abs(preds[i].size.h - gts[i].size.h)) /
                           3.0);
        yaw_err.push_back(std::abs(wrap_yaw(preds[i].yaw - gts[i].yaw)));
    }
    GroundingErrorSummary out;
    out.center = summarize_errors(std::move(center_err), center_bin);
    out.size = summarize_errors(std::move(size_err), size_bin);
    out.yaw = summarize_errors(std::move(yaw_err), yaw_bin);
    return out;
}

std::string write_histogram_csv(const EvalSummary& summary) {
    const int decimals = decimals_for_width(summary.bin_width);
    std::string out = "bin_lower,count\n";
    char buf[64];
    for (const auto& [lower, count] : summary.histogram) {
        std::snprintf(buf, sizeof(buf), "%.*f", decimals, lower);
        out += buf;
        out += "," + std::to_string(count) + "\n";
    }
    out += "mean," + shortest_repr(summary.mean) + "\n";
    out += "median," + shortest_repr(summary.median) + "\n";
    return out;
}

}  // namespace scaffold
