#include "newsforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "newsforge/numerics.hpp"

namespace newsforge {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string ascii_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

Label encode_label(const std::string& raw) {
    const std::string norm = ascii_lower(trim(raw));
    if (norm == "true") return Label::True;
    if (norm == "false") return Label::False;
    if (norm == "partially false" || norm == "partially_false" || norm == "partial") {
        return Label::PartiallyFalse;
    }
    throw UnknownLabelError("\"" + raw + "\"");
}

const std::string& label_name(Label label) {
    static const std::string names[kNumClasses] = {"false", "partially_false", "true"};
    return names[static_cast<int>(label)];
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
    std::unordered_set<std::int64_t> ids;
    ids.reserve(documents_.size());
    for (const Document& doc : documents_) {
        if (trim(doc.text).empty()) {
            throw MalformedRecordError("document " + std::to_string(doc.id) + " has empty text");
        }
        if (doc.id < 0 || !ids.insert(doc.id).second) {
            throw MalformedRecordError("duplicate or negative document id " +
                                       std::to_string(doc.id));
        }
        ++class_counts_[static_cast<int>(doc.label)];
    }
}

namespace {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line the record starts on
};

// RFC-4180: quoted fields may contain commas, escaped quotes ("") and
// newlines; records end at an unquoted newline.
std::vector<CsvRecord> parse_csv(const std::string& content) {
    std::vector<CsvRecord> records;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = content.size();
    while (i < n) {
        CsvRecord rec;
        rec.line = line;
        std::string field;
        bool in_quotes = false;
        bool saw_anything = false;
        for (;;) {
            if (i >= n) {
                if (in_quotes) {
                    throw MalformedRecordError("line " + std::to_string(rec.line) +
                                               ": unterminated quoted field");
                }
                rec.fields.push_back(field);
                break;
            }
            const char c = content[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && content[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                continue;
            }
            if (c == '"') {
                if (!field.empty()) {
                    throw MalformedRecordError("line " + std::to_string(line) +
                                               ": quote inside unquoted field");
                }
                in_quotes = true;
                saw_anything = true;
                ++i;
            } else if (c == ',') {
                rec.fields.push_back(field);
                field.clear();
                saw_anything = true;
                ++i;
            } else if (c == '\n' || c == '\r') {
                rec.fields.push_back(field);
                if (c == '\r' && i + 1 < n && content[i + 1] == '\n') ++i;
                ++i;
                ++line;
                break;
            } else {
                field.push_back(c);
                saw_anything = true;
                ++i;
            }
        }
        // Skip blank lines (a record with a single empty field).
        if (rec.fields.size() == 1 && rec.fields[0].empty() && !saw_anything) continue;
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<Document> load_csv(const std::string& path, const std::string& content) {
    const std::vector<CsvRecord> records = parse_csv(content);
    if (records.empty()) throw EmptyCorpusError(path + " has no records");

    const CsvRecord& header = records.front();
    int text_col = -1, label_col = -1, source_col = -1;
    for (std::size_t c = 0; c < header.fields.size(); ++c) {
        const std::string name = ascii_lower(trim(header.fields[c]));
        if (name == "text") text_col = static_cast<int>(c);
        else if (name == "label") label_col = static_cast<int>(c);
        else if (name == "source") source_col = static_cast<int>(c);
    }
    if (text_col < 0 || label_col < 0) {
        throw MalformedRecordError("line " + std::to_string(header.line) +
                                   ": header must contain `text` and `label` columns");
    }

    std::vector<Document> docs;
    docs.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const CsvRecord& rec = records[r];
        if (rec.fields.size() != header.fields.size()) {
            throw MalformedRecordError("line " + std::to_string(rec.line) + ": expected " +
                                       std::to_string(header.fields.size()) + " fields, found " +
                                       std::to_string(rec.fields.size()));
        }
        Document doc;
        doc.id = static_cast<std::int64_t>(docs.size());
        doc.text = rec.fields[static_cast<std::size_t>(text_col)];
        if (trim(doc.text).empty()) {
            throw MalformedRecordError("line " + std::to_string(rec.line) + ": empty text field");
        }
        const std::string& raw_label = rec.fields[static_cast<std::size_t>(label_col)];
        try {
            doc.label = encode_label(raw_label);
        } catch (const UnknownLabelError&) {
            throw UnknownLabelError("\"" + raw_label + "\" at line " + std::to_string(rec.line));
        }
        if (source_col >= 0) doc.source = trim(rec.fields[static_cast<std::size_t>(source_col)]);
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Document> load_jsonl(const std::string& path, const std::string& content) {
    std::vector<Document> docs;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecordError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("text") || !j.contains("label") ||
            !j["text"].is_string() || !j["label"].is_string()) {
            throw MalformedRecordError("line " + std::to_string(lineno) +
                                       ": expected an object with string `text` and `label`");
        }
        Document doc;
        doc.id = static_cast<std::int64_t>(docs.size());
        doc.text = j["text"].get<std::string>();
        if (trim(doc.text).empty()) {
            throw MalformedRecordError("line " + std::to_string(lineno) + ": empty text field");
        }
        const std::string raw_label = j["label"].get<std::string>();
        try {
            doc.label = encode_label(raw_label);
        } catch (const UnknownLabelError&) {
            throw UnknownLabelError("\"" + raw_label + "\" at line " + std::to_string(lineno));
        }
        if (j.contains("source")) {
            if (!j["source"].is_string()) {
                throw MalformedRecordError("line " + std::to_string(lineno) +
                                           ": `source` must be a string");
            }
            doc.source = j["source"].get<std::string>();
        }
        docs.push_back(std::move(doc));
    }
    (void)path;
    return docs;
}

} // namespace

CorpusFormat guess_format(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : ascii_lower(path.substr(dot));
    if (ext == ".csv") return CorpusFormat::csv;
    return CorpusFormat::jsonl;
}

Corpus load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw MissingFileError(path);
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string content = buf.str();

    std::vector<Document> docs = format == CorpusFormat::csv ? load_csv(path, content)
                                                             : load_jsonl(path, content);
    if (docs.empty()) throw EmptyCorpusError(path + " has no records");
    return Corpus(std::move(docs));
}

namespace {

// round-half-up: 0.2 * 2977 = 595.4 -> 595, and exact halves round up.
std::size_t round_count(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

} // namespace

SplitPair split_corpus(const Corpus& corpus, double ratio, std::uint64_t seed, bool stratified) {
    if (corpus.empty()) throw EmptyCorpusError("cannot split an empty corpus");
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw BadRangeError("split ratio must lie in [0,1], got " + std::to_string(ratio));
    }

    const std::size_t n = corpus.size();
    const std::size_t test_total = round_count(ratio * static_cast<double>(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_test(n, false);
    if (!stratified) {
        for (std::size_t i = 0; i < test_total; ++i) in_test[order[i]] = true;
    } else {
        // Largest-remainder allocation of the per-class test counts.
        std::array<std::size_t, kNumClasses> want{};
        std::array<double, kNumClasses> frac{};
        std::size_t allocated = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            const double quota = ratio * static_cast<double>(corpus.class_counts()[c]);
            want[c] = static_cast<std::size_t>(std::floor(quota));
            frac[c] = quota - std::floor(quota);
            allocated += want[c];
        }
        std::array<int, kNumClasses> by_frac = {0, 1, 2};
        std::stable_sort(by_frac.begin(), by_frac.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        std::size_t deficit = test_total - allocated;
        while (deficit > 0) {
            bool progressed = false;
            for (int c : by_frac) {
                if (deficit == 0) break;
                if (want[c] < static_cast<std::size_t>(corpus.class_counts()[c])) {
                    ++want[c];
                    --deficit;
                    progressed = true;
                }
            }
            if (!progressed) break;
        }
        std::array<std::size_t, kNumClasses> taken{};
        for (std::size_t i = 0; i < n; ++i) {
            const int c = static_cast<int>(corpus[order[i]].label);
            if (taken[c] < want[c]) {
                in_test[order[i]] = true;
                ++taken[c];
            }
        }
    }

    std::vector<Document> train_docs, test_docs;
    train_docs.reserve(n - test_total);
    test_docs.reserve(test_total);
    for (std::size_t i = 0; i < n; ++i) {
        (in_test[i] ? test_docs : train_docs).push_back(corpus[i]);
    }

    SplitPair pair;
    pair.train = Corpus(std::move(train_docs));
    pair.test = Corpus(std::move(test_docs));
    pair.seed = seed;
    pair.ratio = ratio;
    return pair;
}

} // namespace newsforge
