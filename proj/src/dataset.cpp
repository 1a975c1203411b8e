#include "drpt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "drpt/rng.hpp"

namespace drpt {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// RFC 4180: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                row.push_back(field);
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any || !field.empty() || !row.empty()) {
                    row.push_back(field);
                    rows.push_back(std::move(row));
                    row.clear();
                    field.clear();
                    any = false;
                }
                break;
            default:
                field += c;
                any = true;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

bool parse_number(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

void check_permutation(const std::vector<std::size_t>& perm, std::size_t n,
                       const char* what) {
    if (perm.size() != n) {
        throw ValidationError(std::string(what) + ": permutation length " +
                              std::to_string(perm.size()) + " != " + std::to_string(n));
    }
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) {
            throw ValidationError(std::string(what) + ": input is not a permutation");
        }
        seen[p] = true;
    }
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open input file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();

    auto cells = parse_csv(buf.str());
    if (cells.empty()) throw FormatError(path + ": empty file");

    const std::size_t ncols = cells.front().size();
    for (std::size_t r = 0; r < cells.size(); ++r) {
        if (cells[r].size() != ncols) {
            throw FormatError(path + ": ragged row " + std::to_string(r + 1) + " has " +
                              std::to_string(cells[r].size()) + " fields, expected " +
                              std::to_string(ncols));
        }
    }
    if (ncols < 2) throw FormatError(path + ": need at least one feature and a label column");

    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (has_header) {
        header = cells.front();
        first_data = 1;
        if (cells.size() < 2) throw FormatError(path + ": header but no data rows");
    } else {
        for (std::size_t j = 0; j < ncols; ++j) header.push_back("f" + std::to_string(j));
    }

    // Resolve the label column: name, zero-based index, or "last".
    std::size_t label_idx = ncols;
    const std::string want = trim(label_column);
    if (want == "last") {
        label_idx = ncols - 1;
    } else {
        for (std::size_t j = 0; j < ncols; ++j) {
            if (header[j] == want) {
                label_idx = j;
                break;
            }
        }
        if (label_idx == ncols) {
            double idx;
            if (parse_number(want, idx) && idx >= 0 && idx < static_cast<double>(ncols) &&
                idx == std::floor(idx)) {
                label_idx = static_cast<std::size_t>(idx);
            }
        }
    }
    if (label_idx >= ncols) {
        throw FormatError(path + ": label column '" + label_column + "' not found");
    }

    const std::size_t m = cells.size() - first_data;
    const std::size_t n = ncols - 1;

    // Numeric labels are kept verbatim (continuous b is meaningful to the
    // pipeline); otherwise classes are coded 0..C-1 by first appearance.
    bool numeric_labels = true;
    for (std::size_t r = 0; r < m && numeric_labels; ++r) {
        double v;
        numeric_labels = parse_number(trim(cells[r + first_data][label_idx]), v);
    }

    std::vector<double> data(m * n, 0.0);
    std::vector<double> b(m, 0.0);
    std::vector<std::string> class_labels;
    std::map<std::string, double> class_codes;

    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = cells[r + first_data];
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < ncols; ++j) {
            const std::string cell = trim(row[j]);
            if (j == label_idx) {
                if (numeric_labels) {
                    parse_number(cell, b[r]);
                    continue;
                }
                auto it = class_codes.find(cell);
                if (it == class_codes.end()) {
                    // Codes follow first appearance order.
                    it = class_codes.emplace(cell, static_cast<double>(class_labels.size()))
                             .first;
                    class_labels.push_back(cell);
                }
                b[r] = it->second;
                continue;
            }
            if (cell.empty()) {
                data[r * n + out_j] = kMissing;
            } else {
                double v;
                if (!parse_number(cell, v)) {
                    throw FormatError(path + ": non-numeric feature value '" + cell +
                                      "' at row " + std::to_string(r + first_data + 1) +
                                      ", column " + std::to_string(j + 1));
                }
                data[r * n + out_j] = v;
            }
            ++out_j;
        }
    }

    Dataset d;
    d.a = Matrix::with_missing(m, n, std::move(data));
    d.b = std::move(b);
    for (std::size_t j = 0; j < ncols; ++j) {
        if (j != label_idx) d.feature_names.push_back(header[j]);
    }
    d.class_labels = std::move(class_labels);
    return d;
}

Dataset knn_impute(const Dataset& d, std::size_t k) {
    if (!d.has_missing()) return d;
    const std::size_t m = d.samples();
    const std::size_t n = d.features();
    const Matrix& a = d.a;

    Dataset out = d;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> observed;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::isfinite(a.at(i, j))) observed.push_back(i);
        }
        bool column_has_missing = observed.size() < m;
        if (!column_has_missing) continue;
        if (observed.empty()) {
            throw ValidationError("knn_impute: column '" + d.feature_names[j] +
                                  "' is entirely missing");
        }
        if (observed.size() < k) {
            throw ValidationError("knn_impute: column '" + d.feature_names[j] + "' has only " +
                                  std::to_string(observed.size()) +
                                  " observed rows, need at least " + std::to_string(k));
        }

        for (std::size_t i = 0; i < m; ++i) {
            if (std::isfinite(a.at(i, j))) continue;
            // Distance over coordinates observed in both rows, rescaled by
            // the shared-coordinate count.
            std::vector<std::pair<double, std::size_t>> cand;
            for (std::size_t r : observed) {
                double sum = 0.0;
                std::size_t shared = 0;
                for (std::size_t c = 0; c < n; ++c) {
                    const double x = a.at(i, c);
                    const double y = a.at(r, c);
                    if (std::isfinite(x) && std::isfinite(y)) {
                        sum += (x - y) * (x - y);
                        ++shared;
                    }
                }
                const double dist = shared > 0
                                        ? std::sqrt(sum / static_cast<double>(shared))
                                        : std::numeric_limits<double>::infinity();
                cand.emplace_back(dist, r);
            }
            std::sort(cand.begin(), cand.end());
            double mean = 0.0;
            for (std::size_t t = 0; t < k; ++t) mean += a.at(cand[t].second, j);
            out.a.at(i, j) = mean / static_cast<double>(k);
        }
    }
    return out;
}

std::pair<Dataset, NormalizationRecord> normalize(const Dataset& d,
                                                  const NormalizeOptions& opts) {
    if (d.has_missing()) throw ValidationError("normalize: dataset has missing values");
    const std::size_t m = d.samples();
    const std::size_t n = d.features();

    Dataset out = d;
    NormalizationRecord rec;
    rec.min.assign(n, 0.0);
    rec.max.assign(n, 0.0);
    rec.norm.assign(n, 1.0);
    rec.constant.assign(n, false);
    rec.min_max_applied = opts.min_max;
    rec.unit_norm_applied = opts.unit_norm;

    for (std::size_t j = 0; j < n; ++j) {
        double lo = out.a.at(0, j);
        double hi = lo;
        for (std::size_t i = 1; i < m; ++i) {
            lo = std::min(lo, out.a.at(i, j));
            hi = std::max(hi, out.a.at(i, j));
        }
        rec.min[j] = lo;
        rec.max[j] = hi;

        if (opts.min_max) {
            if (hi == lo) {
                for (std::size_t i = 0; i < m; ++i) out.a.at(i, j) = 0.0;
                rec.constant[j] = true;
            } else {
                for (std::size_t i = 0; i < m; ++i) {
                    out.a.at(i, j) = (out.a.at(i, j) - lo) / (hi - lo);
                }
            }
        }

        if (opts.unit_norm) {
            double ss = 0.0;
            for (std::size_t i = 0; i < m; ++i) ss += out.a.at(i, j) * out.a.at(i, j);
            const double nrm = std::sqrt(ss);
            rec.norm[j] = nrm;
            if (nrm == 0.0) {
                rec.constant[j] = true;
            } else {
                for (std::size_t i = 0; i < m; ++i) out.a.at(i, j) /= nrm;
            }
        }
    }
    return {std::move(out), std::move(rec)};
}

SplitPlan stratified_split(const Dataset& d, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("stratified_split: train_fraction must be in (0, 1)");
    }
    std::map<double, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < d.samples(); ++i) by_class[d.b[i]].push_back(i);
    if (by_class.size() < 2) {
        throw ValidationError("stratified_split: need at least 2 classes");
    }

    SplitPlan plan;
    plan.seed = seed;
    plan.train_fraction = train_fraction;

    Rng rng(seed);
    for (auto& [cls, rows] : by_class) {
        if (rows.size() < 2) {
            throw ValidationError("stratified_split: class " + std::to_string(cls) +
                                  " has fewer than 2 members");
        }
        // Fisher-Yates with the seeded generator.
        for (std::size_t i = rows.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
            std::swap(rows[i], rows[j]);
        }
        // Off-by-one resolved toward train: round half up.
        const auto ntrain = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(rows.size()) + 0.5));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (i < ntrain ? plan.train_rows : plan.test_rows).push_back(rows[i]);
        }
    }
    std::sort(plan.train_rows.begin(), plan.train_rows.end());
    std::sort(plan.test_rows.begin(), plan.test_rows.end());
    return plan;
}

Dataset permute_rows(const Dataset& d, const std::vector<std::size_t>& perm) {
    check_permutation(perm, d.samples(), "permute_rows");
    Dataset out = d;
    for (std::size_t i = 0; i < d.samples(); ++i) {
        out.b[i] = d.b[perm[i]];
        for (std::size_t j = 0; j < d.features(); ++j) {
            out.a.at(i, j) = d.a.at(perm[i], j);
        }
    }
    return out;
}

Dataset permute_cols(const Dataset& d, const std::vector<std::size_t>& perm) {
    check_permutation(perm, d.features(), "permute_cols");
    Dataset out = d;
    for (std::size_t j = 0; j < d.features(); ++j) {
        out.feature_names[j] = d.feature_names[perm[j]];
        for (std::size_t i = 0; i < d.samples(); ++i) {
            out.a.at(i, j) = d.a.at(i, perm[j]);
        }
    }
    return out;
}

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.feature_names = d.feature_names;
    out.class_labels = d.class_labels;
    out.a = Matrix(rows.size(), d.features());
    out.b.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.b[i] = d.b[rows[i]];
        for (std::size_t j = 0; j < d.features(); ++j) {
            out.a.at(i, j) = d.a.at(rows[i], j);
        }
    }
    return out;
}

std::uint64_t content_hash(const Dataset& d) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](const void* p, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    mix_bytes(d.a.data().data(), d.a.data().size() * sizeof(double));
    mix_bytes(d.b.data(), d.b.size() * sizeof(double));
    for (const auto& name : d.feature_names) mix_bytes(name.data(), name.size());
    return h;
}

void write_csv(const Dataset& d, const std::string& path, const std::string& label_name) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open output file: " + path);
    for (const auto& name : d.feature_names) out << name << ',';
    out << label_name << '\n';
    char buf[64];
    for (std::size_t i = 0; i < d.samples(); ++i) {
        for (std::size_t j = 0; j < d.features(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", d.a.at(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", d.b[i]);
        out << buf << '\n';
    }
}

}  // namespace drpt
