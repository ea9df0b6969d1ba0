#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/stats_types.hpp"
#include "nmx/util.hpp"

namespace nmx {

namespace detail {

struct StatsFile {
    std::vector<std::string> columns;                 // from the ColHeaders line
    std::vector<std::vector<std::string>> rows;       // whitespace-split data rows
    std::vector<std::size_t> row_lines;               // 1-based source line of each row
    ParseStats stats;
};

// Shared lexical pass for aparc/aseg files: '#' comments, one ColHeaders line,
// whitespace-delimited data rows that must match the header arity.
inline StatsFile lex_stats_file(std::string_view text) {
    StatsFile out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_colheaders = false;

    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line;
        if (eol == std::string_view::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, eol - pos);
            pos = eol + 1;
        }
        ++line_no;
        out.stats.total_lines = line_no;

        std::string_view stripped = trim(line);
        if (stripped.empty()) {
            ++out.stats.skipped_lines;
            continue;
        }
        if (stripped.front() == '#') {
            ++out.stats.skipped_lines;
            auto tokens = split_whitespace(stripped.substr(1));
            if (!tokens.empty() && tokens[0] == "ColHeaders") {
                if (saw_colheaders)
                    raise(errc::malformed_header, "multiple ColHeaders lines (line " + std::to_string(line_no) + ")");
                out.columns.assign(tokens.begin() + 1, tokens.end());
                if (out.columns.empty())
                    raise(errc::malformed_header, "empty ColHeaders line (line " + std::to_string(line_no) + ")");
                saw_colheaders = true;
            }
            continue;
        }
        if (!saw_colheaders)
            raise(errc::malformed_header, "data row before any ColHeaders line (line " + std::to_string(line_no) + ")");
        auto tokens = split_whitespace(stripped);
        if (tokens.size() != out.columns.size())
            raise(errc::row_arity_mismatch, "line " + std::to_string(line_no) + " has " +
                                                std::to_string(tokens.size()) + " fields, header names " +
                                                std::to_string(out.columns.size()));
        out.rows.push_back(std::move(tokens));
        out.row_lines.push_back(line_no);
        ++out.stats.data_rows;
    }
    if (!saw_colheaders) raise(errc::malformed_header, "no ColHeaders line found");
    return out;
}

inline std::size_t column_index(const StatsFile& f, const std::string& name) {
    auto it = std::find(f.columns.begin(), f.columns.end(), name);
    if (it == f.columns.end()) raise(errc::unknown_column, "required column '" + name + "' not in ColHeaders");
    return static_cast<std::size_t>(it - f.columns.begin());
}

inline double numeric_cell(const StatsFile& f, std::size_t row, std::size_t col, bool integral = false) {
    const std::string& cell = f.rows[row][col];
    double v = 0;
    if (!try_parse_double(cell, v))
        raise(errc::non_numeric_cell, "'" + cell + "' in column " + f.columns[col] + " (line " +
                                          std::to_string(f.row_lines[row]) + ")");
    if (integral && !is_integral_value(v))
        raise(errc::non_numeric_cell, "'" + cell + "' in column " + f.columns[col] +
                                          " must be integral (line " + std::to_string(f.row_lines[row]) + ")");
    return v;
}

}  // namespace detail

// Parses an aparc cortical parcellation stats file into an N x 8 table.
// Columns are located by ColHeaders name, so reordered files parse identically.
// NumVert is validated as an integral count but not retained as a parameter.
inline HemisphereTable parse_aparc_stats(std::string_view text, Hemisphere hemi,
                                         const ParseOptions& opts = {}, ParseStats* stats_out = nullptr) {
    auto file = detail::lex_stats_file(text);
    if (stats_out) *stats_out = file.stats;

    const std::size_t name_col = detail::column_index(file, "StructName");
    const std::size_t numvert_col = detail::column_index(file, "NumVert");
    const auto& params = cortical_param_labels();
    std::vector<std::size_t> param_cols;
    param_cols.reserve(params.size());
    for (const auto& p : params) param_cols.push_back(detail::column_index(file, p));

    if (!opts.lenient && file.rows.size() != opts.cortical_region_count)
        raise(errc::region_count_mismatch, "found " + std::to_string(file.rows.size()) +
                                               " regions, expected " + std::to_string(opts.cortical_region_count));

    HemisphereTable table;
    table.hemisphere = hemi;
    table.kind = TableKind::cortical;
    table.param_labels = params;
    table.values = Matrix(file.rows.size(), params.size());
    table.region_labels.reserve(file.rows.size());
    for (std::size_t r = 0; r < file.rows.size(); ++r) {
        table.region_labels.push_back(file.rows[r][name_col]);
        detail::numeric_cell(file, r, numvert_col, /*integral=*/true);
        for (std::size_t p = 0; p < param_cols.size(); ++p)
            table.values.at(r, p) = detail::numeric_cell(file, r, param_cols[p]);
    }
    return table;
}

// Parses an aseg segmentation stats file into paired (left, right) N x 5 tables
// over the configured lateralized structures; rows pair by structure base name.
// Non-lateralized rows (Brain-Stem, CSF, ...) are parsed and ignored.
inline std::pair<HemisphereTable, HemisphereTable> parse_aseg_stats(std::string_view text,
                                                                    const ParseOptions& opts = {},
                                                                    ParseStats* stats_out = nullptr) {
    auto file = detail::lex_stats_file(text);
    if (stats_out) *stats_out = file.stats;

    const std::size_t name_col = detail::column_index(file, "StructName");
    const std::size_t nvox_col = detail::column_index(file, "NVoxels");
    const std::size_t vol_col = detail::column_index(file, "Volume_mm3");
    const std::size_t mean_col = detail::column_index(file, "normMean");
    const std::size_t std_col = detail::column_index(file, "normStdDev");
    const std::size_t max_col = detail::column_index(file, "normMax");

    struct SideRows {
        std::map<std::string, std::size_t> by_name;
        std::vector<std::string> order;  // first-appearance order of base names
    };
    SideRows left, right;
    for (std::size_t r = 0; r < file.rows.size(); ++r) {
        const std::string& name = file.rows[r][name_col];
        SideRows* side = nullptr;
        std::string base;
        if (name.starts_with("Left-")) {
            side = &left;
            base = name.substr(5);
        } else if (name.starts_with("Right-")) {
            side = &right;
            base = name.substr(6);
        } else {
            continue;
        }
        auto [it, inserted] = side->by_name.emplace(base, r);
        if (!inserted)
            raise(errc::duplicate_structure, "'" + name + "' appears twice (line " +
                                                 std::to_string(file.row_lines[r]) + ")");
        side->order.push_back(base);
    }

    std::vector<std::string> structures;
    if (opts.lenient) {
        // Pair whatever appears on both sides, in left-side order.
        for (const auto& base : left.order)
            if (right.by_name.count(base)) structures.push_back(base);
    } else {
        for (const auto& base : opts.subcortical_structures) {
            if (!left.by_name.count(base)) raise(errc::missing_structure, "Left-" + base + " not found");
            if (!right.by_name.count(base)) raise(errc::missing_structure, "Right-" + base + " not found");
            structures.push_back(base);
        }
    }

    auto make_table = [&](Hemisphere hemi, const SideRows& side) {
        HemisphereTable t;
        t.hemisphere = hemi;
        t.kind = TableKind::subcortical;
        t.param_labels = subcortical_param_labels();
        t.region_labels = structures;
        t.values = Matrix(structures.size(), t.param_labels.size());
        for (std::size_t i = 0; i < structures.size(); ++i) {
            std::size_t r = side.by_name.at(structures[i]);
            t.values.at(i, 0) = detail::numeric_cell(file, r, nvox_col, /*integral=*/true);
            t.values.at(i, 1) = detail::numeric_cell(file, r, vol_col);
            t.values.at(i, 2) = detail::numeric_cell(file, r, mean_col);
            t.values.at(i, 3) = detail::numeric_cell(file, r, std_col);
            t.values.at(i, 4) = detail::numeric_cell(file, r, max_col);
        }
        return t;
    };
    return {make_table(Hemisphere::left, left), make_table(Hemisphere::right, right)};
}

// Loads a whole cohort from a manifest CSV. Relative stats paths resolve
// against the manifest's directory; subject order follows the manifest.
inline std::vector<SubjectScan> load_cohort(const std::filesystem::path& manifest_path,
                                            const ParseOptions& opts = {}) {
    auto records = read_csv_file(manifest_path);
    if (records.empty()) raise(errc::invalid_config, "manifest " + manifest_path.string() + " is empty");
    if (records[0] != cohort_manifest_header())
        raise(errc::invalid_config, "manifest header must be subject_id,label,lh_aparc,rh_aparc,aseg");

    const auto base = manifest_path.has_parent_path() ? manifest_path.parent_path() : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base / path;
    };

    std::vector<SubjectScan> cohort;
    std::set<std::string> seen_ids;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.size() != 5)
            raise(errc::invalid_config, "manifest row " + std::to_string(i + 1) + " has " +
                                            std::to_string(rec.size()) + " fields, expected 5");
        SubjectScan scan;
        scan.subject_id = rec[0];
        if (!seen_ids.insert(scan.subject_id).second)
            raise(errc::duplicate_subject_id, "'" + scan.subject_id + "' listed twice in manifest");
        try {
            scan.label = label_from_string(rec[1]);
            scan.cortical_left = parse_aparc_stats(read_text_file(resolve(rec[2])), Hemisphere::left, opts);
            scan.cortical_right = parse_aparc_stats(read_text_file(resolve(rec[3])), Hemisphere::right, opts);
            auto [sub_l, sub_r] = parse_aseg_stats(read_text_file(resolve(rec[4])), opts);
            scan.subcortical_left = std::move(sub_l);
            scan.subcortical_right = std::move(sub_r);
        } catch (const Error& e) {
            throw Error(e.code(), "subject '" + scan.subject_id + "': " + e.what());
        }
        if (scan.cortical_left.region_labels != scan.cortical_right.region_labels)
            raise(errc::region_pairing_mismatch,
                  "subject '" + scan.subject_id + "': lh/rh cortical region lists differ");
        cohort.push_back(std::move(scan));
    }
    return cohort;
}

// Writes the 13 per-parameter cohort CSVs (8 cortical, 5 subcortical), one row
// per subject, one lh/rh column pair per region.
inline std::vector<std::filesystem::path> export_parameter_tables(const std::vector<SubjectScan>& cohort,
                                                                  const std::filesystem::path& out_dir) {
    if (cohort.empty()) raise(errc::invalid_spec, "cannot export an empty cohort");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    std::vector<std::filesystem::path> written;
    auto export_kind = [&](TableKind kind) {
        const auto& first_left = kind == TableKind::cortical ? cohort[0].cortical_left : cohort[0].subcortical_left;
        const auto& params = first_left.param_labels;
        const auto& regions = first_left.region_labels;
        for (const auto& scan : cohort) {
            const auto& l = kind == TableKind::cortical ? scan.cortical_left : scan.subcortical_left;
            if (l.region_labels != regions)
                raise(errc::region_pairing_mismatch,
                      "subject '" + scan.subject_id + "': region labels differ from the rest of the cohort");
        }
        for (std::size_t p = 0; p < params.size(); ++p) {
            std::vector<std::string> header = {"subject_id"};
            for (const auto& r : regions) {
                header.push_back("lh_" + r);
                header.push_back("rh_" + r);
            }
            CsvWriter csv(header);
            for (const auto& scan : cohort) {
                const auto& l = kind == TableKind::cortical ? scan.cortical_left : scan.subcortical_left;
                const auto& r = kind == TableKind::cortical ? scan.cortical_right : scan.subcortical_right;
                std::vector<std::string> row = {scan.subject_id};
                for (std::size_t i = 0; i < regions.size(); ++i) {
                    row.push_back(format_double(l.values.at(i, p)));
                    row.push_back(format_double(r.values.at(i, p)));
                }
                csv.add_row(row);
            }
            auto path = out_dir / (std::string(kind_name(kind)) + "_" + params[p] + ".csv");
            csv.save(path);
            written.push_back(path);
        }
    };
    export_kind(TableKind::cortical);
    export_kind(TableKind::subcortical);
    return written;
}

}  // namespace nmx
