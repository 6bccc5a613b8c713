#include "dq/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

namespace dq::io {

InputError::InputError(std::string file, std::size_t line, std::size_t column, const std::string& message)
    : Error([&] {
          std::ostringstream os;
          os << file;
          if (line > 0) os << ":" << line;
          if (column > 0) os << ":" << column;
          os << ": " << message;
          return os.str();
      }()),
      file_(std::move(file)),
      line_(line),
      column_(column) {}

namespace {

struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

struct Table {
    std::string file;
    std::vector<std::string> header;
    std::vector<Row> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        auto it = std::ranges::find(header, name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    }
    std::size_t require(const std::string& name) const {
        auto c = column(name);
        if (!c) throw InputError(file, 1, 0, "missing required column '" + name + "'");
        return *c;
    }
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

Table read_table(const std::filesystem::path& path, char delim) {
    Table t;
    t.file = path.string();
    std::ifstream in(path);
    if (!in) throw InputError(t.file, 0, 0, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        auto fields = split(line, delim);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            std::ostringstream os;
            os << "expected " << t.header.size() << " fields (per header), found " << fields.size();
            throw InputError(t.file, lineno, std::min(fields.size(), t.header.size()) + 1, os.str());
        }
        t.rows.push_back({lineno, std::move(fields)});
    }
    if (t.header.empty()) throw InputError(t.file, 0, 0, "file has no header row");
    return t;
}

SampleId parse_id(const Table& t, const Row& r, std::size_t col) {
    const std::string& f = r.fields[col];
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw InputError(t.file, r.line, col + 1, "invalid sample id '" + f + "'");
    return SampleId{v};
}

long long parse_int(const Table& t, const Row& r, std::size_t col, const char* what) {
    const std::string& f = r.fields[col];
    long long v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw InputError(t.file, r.line, col + 1, std::string("invalid ") + what + " '" + f + "'");
    return v;
}

double parse_real(const Table& t, const Row& r, std::size_t col) {
    const std::string& f = r.fields[col];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw InputError(t.file, r.line, col + 1, "invalid number '" + f + "'");
    if (!std::isfinite(v)) throw InputError(t.file, r.line, col + 1, "non-finite value '" + f + "'");
    return v;
}

// Rows keyed by id, with the line each came from.
struct IdRows {
    std::string file;
    std::vector<SampleId> order;
    std::unordered_map<SampleId, std::size_t> row_of;  // into Table::rows
};

IdRows index_rows(const Table& t, std::size_t id_col, std::span<const std::size_t> rows) {
    IdRows ix;
    ix.file = t.file;
    for (std::size_t r : rows) {
        const SampleId id = parse_id(t, t.rows[r], id_col);
        if (!ix.row_of.emplace(id, r).second)
            throw InputError(t.file, t.rows[r].line, id_col + 1, "duplicate sample id " + std::to_string(id.value));
        ix.order.push_back(id);
    }
    return ix;
}

IdRows index_all(const Table& t, std::size_t id_col) {
    std::vector<std::size_t> rows(t.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return index_rows(t, id_col, rows);
}

void check_alignment(const IdRows& canonical, const IdRows& other, const Table& other_table) {
    for (SampleId id : canonical.order)
        if (!other.row_of.contains(id))
            throw InputError(other.file, 0, 0,
                             "sample id " + std::to_string(id.value) + " from " + canonical.file + " is missing");
    for (SampleId id : other.order)
        if (!canonical.row_of.contains(id))
            throw InputError(other.file, other_table.rows[other.row_of.at(id)].line, 0,
                             "sample id " + std::to_string(id.value) + " does not appear in " + canonical.file);
}

struct EpochBlock {
    int epoch;
    const Table* table;
    IdRows rows;
};

}  // namespace

LoadedInputs load_inputs(const TabularInputSpec& spec) {
    LoadedInputs out;
    std::optional<Table> labels_t, features_t, embed_t;
    std::vector<Table> prob_t;
    if (spec.labels) labels_t = read_table(*spec.labels, spec.delimiter);
    else out.absent.push_back("labels");
    if (spec.features) features_t = read_table(*spec.features, spec.delimiter);
    else out.absent.push_back("features");
    if (spec.embeddings) embed_t = read_table(*spec.embeddings, spec.delimiter);
    else out.absent.push_back("embeddings");
    for (const auto& p : spec.probabilities) prob_t.push_back(read_table(p, spec.delimiter));
    if (prob_t.empty()) out.absent.push_back("probabilities");

    // Probability blocks, one per epoch.
    std::vector<EpochBlock> blocks;
    std::vector<std::size_t> class_cols;
    std::string class_file;
    const bool long_format = prob_t.size() == 1 && prob_t[0].column("epoch").has_value();
    for (std::size_t f = 0; f < prob_t.size(); ++f) {
        const Table& t = prob_t[f];
        const std::size_t id_col = t.require("id");
        const auto epoch_col = t.column("epoch");
        if (epoch_col && !long_format)
            throw InputError(t.file, 1, *epoch_col + 1, "long-format probabilities must be the only probability file");
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < t.header.size(); ++c)
            if (c != id_col && (!epoch_col || c != *epoch_col)) cols.push_back(c);
        if (cols.empty()) throw InputError(t.file, 1, 0, "no class probability columns");
        if (!class_cols.empty() && cols.size() != class_cols.size()) {
            throw InputError(t.file, 1, 0,
                             "has " + std::to_string(cols.size()) + " class columns but " + class_file + " has " +
                                 std::to_string(class_cols.size()));
        }
        class_cols = cols;
        class_file = t.file;
        if (long_format) {
            std::map<long long, std::vector<std::size_t>> by_epoch;
            for (std::size_t r = 0; r < t.rows.size(); ++r)
                by_epoch[parse_int(t, t.rows[r], *epoch_col, "epoch")].push_back(r);
            for (auto& [e, rows] : by_epoch)
                blocks.push_back({static_cast<int>(e), &t, index_rows(t, id_col, rows)});
        } else {
            blocks.push_back({static_cast<int>(f), &t, index_all(t, id_col)});
        }
    }

    // Canonical sample order.
    std::optional<IdRows> labels_ix, features_ix, embed_ix;
    if (labels_t) labels_ix = index_all(*labels_t, labels_t->require("id"));
    if (features_t) features_ix = index_all(*features_t, features_t->require("id"));
    if (embed_t) embed_ix = index_all(*embed_t, embed_t->require("id"));
    const IdRows* canonical = labels_ix     ? &*labels_ix
                              : features_ix ? &*features_ix
                              : !blocks.empty() ? &blocks.front().rows
                              : embed_ix ? &*embed_ix
                                         : nullptr;
    if (!canonical) throw Error("no input files were given");
    out.ids = canonical->order;
    if (out.ids.empty()) throw InputError(canonical->file, 0, 0, "no samples");

    if (features_ix && canonical != &*features_ix) check_alignment(*canonical, *features_ix, *features_t);
    if (embed_ix && canonical != &*embed_ix) check_alignment(*canonical, *embed_ix, *embed_t);
    for (const auto& b : blocks)
        if (canonical != &b.rows) check_alignment(*canonical, b.rows, *b.table);

    // Class count: explicit, else probability columns, else largest label.
    if (spec.class_count) out.class_count = *spec.class_count;
    else if (!class_cols.empty()) out.class_count = static_cast<int>(class_cols.size());

    if (labels_t) {
        const std::size_t label_col = labels_t->require("label");
        int max_label = 0;
        for (SampleId id : out.ids) {
            const Row& r = labels_t->rows[labels_ix->row_of.at(id)];
            const long long l = parse_int(*labels_t, r, label_col, "label");
            if (l < 0) throw InputError(labels_t->file, r.line, label_col + 1, "negative label");
            if (out.class_count > 0 && l >= out.class_count) {
                std::string src = !class_cols.empty() && !spec.class_count ? " implied by " + class_file : "";
                throw InputError(labels_t->file, r.line, label_col + 1,
                                 "label " + std::to_string(l) + " outside [0, " + std::to_string(out.class_count) +
                                     ")" + src);
            }
            max_label = std::max(max_label, static_cast<int>(l));
            out.labels.push_back(static_cast<ClassLabel>(l));
        }
        if (out.class_count == 0) out.class_count = std::max(2, max_label + 1);
    }
    if (!class_cols.empty() && static_cast<std::size_t>(out.class_count) != class_cols.size())
        throw InputError(class_file, 1, 0,
                         "has " + std::to_string(class_cols.size()) + " class columns but class count is " +
                             std::to_string(out.class_count));

    if (!blocks.empty()) {
        const std::size_t n = out.ids.size();
        const std::size_t k = class_cols.size();
        std::vector<int> epochs;
        std::vector<Matrix> mats;
        for (const auto& b : blocks) {
            Matrix m(n, k);
            for (std::size_t i = 0; i < n; ++i) {
                const Row& r = b.table->rows[b.rows.row_of.at(out.ids[i])];
                for (std::size_t j = 0; j < k; ++j) m(i, j) = parse_real(*b.table, r, class_cols[j]);
            }
            epochs.push_back(b.epoch);
            mats.push_back(std::move(m));
        }
        ProbabilityHistory h(std::move(epochs), std::move(mats));
        if (h.epoch_count() < spec.min_epochs) throw InputError(blocks.front().table->file, 0, 0, "E < 2");
        // A lone snapshot is checked row-wise by validating it twice over.
        const auto v = h.epoch_count() >= 2
                           ? validate_probability_history(h)
                           : validate_probability_history(ProbabilityHistory(
                                 {0, 1}, {h.matrices()[0], h.matrices()[0]}));
        if (!v.ok()) {
            const auto& b = blocks[std::min(v.epoch_position, blocks.size() - 1)];
            const std::size_t line =
                v.error == HistoryErrorKind::too_few_epochs ? 0
                                                            : b.table->rows[b.rows.row_of.at(out.ids[v.row])].line;
            throw InputError(b.table->file, line, 0, v.message);
        }
        out.history = std::move(h);
    }

    if (features_t) {
        const std::size_t id_col = features_t->require("id");
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < features_t->header.size(); ++c)
            if (c != id_col) cols.push_back(c);
        if (cols.empty()) throw InputError(features_t->file, 1, 0, "no feature columns");
        Matrix x(out.ids.size(), cols.size());
        for (std::size_t i = 0; i < out.ids.size(); ++i) {
            const Row& r = features_t->rows[features_ix->row_of.at(out.ids[i])];
            for (std::size_t j = 0; j < cols.size(); ++j) x(i, j) = parse_real(*features_t, r, cols[j]);
        }
        if (labels_t) out.dataset.emplace(std::move(x), out.labels, out.class_count, out.ids);
    }

    if (embed_t) {
        const std::size_t id_col = embed_t->require("id");
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < embed_t->header.size(); ++c)
            if (c != id_col) cols.push_back(c);
        if (cols.empty()) throw InputError(embed_t->file, 1, 0, "no embedding columns");
        Matrix e(out.ids.size(), cols.size());
        for (std::size_t i = 0; i < out.ids.size(); ++i) {
            const Row& r = embed_t->rows[embed_ix->row_of.at(out.ids[i])];
            for (std::size_t j = 0; j < cols.size(); ++j) e(i, j) = parse_real(*embed_t, r, cols[j]);
        }
        out.embeddings.emplace(out.ids, std::move(e));
    }
    return out;
}

std::vector<SampleId> load_id_list(const std::filesystem::path& path, char delimiter) {
    const Table t = read_table(path, delimiter);
    return index_all(t, t.require("id")).order;
}

std::string fingerprint_files(const std::vector<std::pair<std::string, std::filesystem::path>>& files) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 unavailable");
    for (const auto& [role, path] : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError(path.string(), 0, 0, "cannot open file");
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        // Role and length framing keep file boundaries unambiguous.
        const std::string frame = role + ":" + std::to_string(bytes.size()) + ":";
        EVP_DigestUpdate(ctx.get(), frame.data(), frame.size());
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out = "sha256:";
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string fingerprint(const TabularInputSpec& spec) {
    std::vector<std::pair<std::string, std::filesystem::path>> files;
    if (spec.features) files.emplace_back("features", *spec.features);
    if (spec.labels) files.emplace_back("labels", *spec.labels);
    if (spec.embeddings) files.emplace_back("embeddings", *spec.embeddings);
    for (const auto& p : spec.probabilities) files.emplace_back("probabilities", p);
    return fingerprint_files(files);
}

namespace {

void append_real(std::string& s, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    s.append(buf, ptr);
}

}  // namespace

std::string format_labels_csv(std::span<const SampleId> ids, std::span<const ClassLabel> labels) {
    std::string s = "id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        s += std::to_string(ids[i].value) + "," + std::to_string(labels[i]) + "\n";
    return s;
}

std::string format_matrix_csv(std::span<const SampleId> ids, const Matrix& values, const std::string& prefix) {
    std::string s = "id";
    for (std::size_t j = 0; j < values.cols(); ++j) s += "," + prefix + std::to_string(j);
    s += "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        s += std::to_string(ids[i].value);
        for (double v : values.row(i)) {
            s += ",";
            append_real(s, v);
        }
        s += "\n";
    }
    return s;
}

std::string format_history_csv(std::span<const SampleId> ids, const ProbabilityHistory& history) {
    const auto mats = history.matrices();
    const auto epochs = history.epochs();
    std::string s = "epoch,id";
    const std::size_t k = mats.empty() ? 0 : mats[0].cols();
    for (std::size_t j = 0; j < k; ++j) s += ",p" + std::to_string(j);
    s += "\n";
    for (std::size_t e = 0; e < mats.size(); ++e) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            s += std::to_string(epochs[e]) + "," + std::to_string(ids[i].value);
            for (double v : mats[e].row(i)) {
                s += ",";
                append_real(s, v);
            }
            s += "\n";
        }
    }
    return s;
}

std::string format_id_list_csv(std::span<const SampleId> ids) {
    std::string s = "id\n";
    for (SampleId id : ids) s += std::to_string(id.value) + "\n";
    return s;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << contents;
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace dq::io
