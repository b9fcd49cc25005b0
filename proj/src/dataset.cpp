#include "swallowsense/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "swallowsense/errors.hpp"
#include "swallowsense/prng.hpp"

namespace swallowsense {

int label_for(LabelScheme scheme, int pas) {
    if (pas < 1 || pas > 8) throw Error(errc::invalid_pas, "PAS " + std::to_string(pas));
    if (scheme == LabelScheme::abnormality) return pas <= 2 ? 0 : 1;
    if (pas <= 2) return 0;
    return pas <= 5 ? 1 : 2;
}

int num_classes(LabelScheme scheme) {
    return scheme == LabelScheme::abnormality ? 2 : 3;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& cell, const std::string& what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
        throw Error(errc::invalid_value, what + " '" + cell + "'");
    return value;
}

int parse_gender(std::string cell) {
    std::transform(cell.begin(), cell.end(), cell.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (cell == "female" || cell == "f" || cell == "0") return 0;
    if (cell == "male" || cell == "m" || cell == "1") return 1;
    throw Error(errc::invalid_value, "gender '" + cell + "'");
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    if (path.empty() || base_dir.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

std::vector<PatientRecord> parse_manifest(const std::string& csv_text,
                                          const std::string& base_dir) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw Error(errc::missing_column, "empty manifest");

    const auto header = split_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

    for (const char* required : {"patient_id", "age", "gender", "pas", "wav_path"})
        if (!col.count(required))
            throw Error(errc::missing_column, std::string("manifest lacks ") + required);

    auto optional_cell = [&](const std::vector<std::string>& fields,
                             const char* name) -> std::optional<std::string> {
        auto it = col.find(name);
        if (it == col.end() || it->second >= fields.size()) return std::nullopt;
        if (fields[it->second].empty()) return std::nullopt;
        return fields[it->second];
    };

    std::vector<PatientRecord> records;
    std::map<std::string, std::size_t> index_of;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line);
        if (fields.size() < header.size())
            throw Error(errc::missing_column,
                        "line " + std::to_string(line_no) + " has too few cells");

        PatientRecord row;
        row.patient_id = fields[col["patient_id"]];
        if (row.patient_id.empty())
            throw Error(errc::invalid_value, "empty patient_id on line " + std::to_string(line_no));
        row.age = parse_number(fields[col["age"]], "age");
        if (!(row.age > 0.0)) throw Error(errc::invalid_value, "age must be positive");
        row.gender = parse_gender(fields[col["gender"]]);
        const double pas = parse_number(fields[col["pas"]], "pas");
        if (pas != std::floor(pas) || pas < 1 || pas > 8)
            throw Error(errc::invalid_pas, "PAS " + fields[col["pas"]]);
        row.pas = static_cast<int>(pas);

        RecordingRef rec;
        rec.wav_path = resolve_path(fields[col["wav_path"]], base_dir);
        if (rec.wav_path.empty()) throw Error(errc::invalid_value, "empty wav_path");
        if (auto ann = optional_cell(fields, "annotation_path"))
            rec.annotation_path = resolve_path(*ann, base_dir);

        // Optional per-clip parameter overrides (manual tuning hook). Any
        // subset may be present; missing cells fall back to the run default.
        const auto top_db = optional_cell(fields, "top_db");
        const auto gap_time = optional_cell(fields, "gap_time");
        const auto min_amp = optional_cell(fields, "min_amplitude");
        const auto max_amp = optional_cell(fields, "max_amplitude");
        if (top_db || gap_time || min_amp || max_amp) {
            SegmentationParams params;  // defaults for unspecified elements
            if (top_db) params.top_db = parse_number(*top_db, "top_db");
            if (gap_time) params.gap_time = parse_number(*gap_time, "gap_time");
            if (min_amp) params.min_amplitude = parse_number(*min_amp, "min_amplitude");
            if (max_amp) params.max_amplitude = parse_number(*max_amp, "max_amplitude");
            if (!params.valid())
                throw Error(errc::invalid_value,
                            "invalid parameter override on line " + std::to_string(line_no));
            rec.params_override = params;
        }

        auto it = index_of.find(row.patient_id);
        if (it == index_of.end()) {
            index_of[row.patient_id] = records.size();
            row.recordings.push_back(rec);
            records.push_back(std::move(row));
        } else {
            PatientRecord& existing = records[it->second];
            if (existing.age != row.age || existing.gender != row.gender ||
                existing.pas != row.pas)
                throw Error(errc::inconsistent_patient,
                            row.patient_id + " has conflicting demographics");
            existing.recordings.push_back(rec);
        }
    }

    if (records.empty()) throw Error(errc::missing_column, "manifest has no data rows");
    return records;
}

std::vector<PatientRecord> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, std::filesystem::path(path).parent_path().string());
}

int total_swallows(const std::vector<std::vector<Segment>>& segments_per_recording) {
    int total = 0;
    for (const auto& segs : segments_per_recording) total += static_cast<int>(segs.size());
    return total;
}

SplitPlan make_splits(const std::vector<PatientRecord>& records, LabelScheme scheme,
                      const std::vector<int>& swallow_counts, int n_splits,
                      double test_fraction, std::uint64_t seed) {
    if (records.size() != swallow_counts.size())
        throw Error(errc::dimension_mismatch, "swallow_counts must align with records");
    if (n_splits < 1) throw Error(errc::invalid_config, "n_splits must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(errc::invalid_config, "test_fraction must lie in (0, 1)");

    // Canonical per-class order (swallow count desc, id asc) so the result
    // depends only on content, not on manifest row order.
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < records.size(); ++i)
        by_class[label_for(scheme, records[i].pas)].push_back(i);
    for (auto& [cls, members] : by_class) {
        if (members.size() < 2)
            throw Error(errc::class_too_small,
                        "class " + std::to_string(cls) + " has " +
                            std::to_string(members.size()) + " patient(s), need >= 2");
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            if (swallow_counts[a] != swallow_counts[b])
                return swallow_counts[a] > swallow_counts[b];
            return records[a].patient_id < records[b].patient_id;
        });
    }

    int total = 0;
    for (int c : swallow_counts) total += c;

    SplitPlan plan;
    plan.n_splits = n_splits;
    plan.test_fraction = test_fraction;
    plan.seed = seed;

    constexpr int kMaxAttempts = 50;
    for (int s = 0; s < n_splits; ++s) {
        SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(s));
        std::vector<std::size_t> best_test;
        double best_dev = -1.0;
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            std::vector<std::size_t> test;
            for (auto& [cls, members] : by_class) {
                std::vector<std::size_t> shuffled = members;
                rng.shuffle(shuffled);
                auto n_test = static_cast<std::size_t>(
                    std::lround(test_fraction * static_cast<double>(members.size())));
                n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
                test.insert(test.end(), shuffled.begin(),
                            shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));
            }
            int test_swallows = 0;
            for (std::size_t i : test) test_swallows += swallow_counts[i];
            const double share =
                total > 0 ? static_cast<double>(test_swallows) / total : test_fraction;
            const double dev = std::abs(share - test_fraction);
            if (best_dev < 0.0 || dev < best_dev) {
                best_dev = dev;
                best_test = test;
            }
            // Prefer the first allocation whose swallow share stays within
            // 10% (relative) of the patient-level test fraction.
            if (dev <= 0.1 * test_fraction) break;
        }

        std::set<std::size_t> test_set(best_test.begin(), best_test.end());
        SplitPlan::Split split;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (test_set.count(i))
                split.test_ids.push_back(records[i].patient_id);
            else
                split.train_ids.push_back(records[i].patient_id);
        }
        plan.splits.push_back(std::move(split));
    }
    return plan;
}

void assert_no_leakage(const SplitPlan& plan, const std::vector<std::string>& patient_ids) {
    const std::set<std::string> all(patient_ids.begin(), patient_ids.end());
    for (std::size_t s = 0; s < plan.splits.size(); ++s) {
        const auto& split = plan.splits[s];
        std::set<std::string> train(split.train_ids.begin(), split.train_ids.end());
        std::set<std::string> seen = train;
        for (const auto& id : split.test_ids) {
            if (train.count(id))
                throw AssertionError("patient " + id + " appears in both sides of split " +
                                     std::to_string(s));
            if (!seen.insert(id).second)
                throw AssertionError("patient " + id + " duplicated in split " +
                                     std::to_string(s));
        }
        if (seen != all)
            throw AssertionError("split " + std::to_string(s) +
                                 " does not cover every patient exactly once");
    }
}

}  // namespace swallowsense
