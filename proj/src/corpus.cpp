#include "semrank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "semrank/errors.hpp"

namespace semrank {

void Qrels::add(int topic_id, const std::string& doc_id, int grade) {
  judgments_[topic_id][doc_id] = grade;
}

std::optional<int> Qrels::grade(int topic_id, const std::string& doc_id) const {
  auto topic = judgments_.find(topic_id);
  if (topic == judgments_.end()) return std::nullopt;
  auto doc = topic->second.find(doc_id);
  if (doc == topic->second.end()) return std::nullopt;
  return doc->second;
}

bool Qrels::relevant(int topic_id, const std::string& doc_id) const {
  auto g = grade(topic_id, doc_id);
  return g.has_value() && *g >= 1;
}

std::size_t Qrels::num_relevant(int topic_id) const {
  auto topic = judgments_.find(topic_id);
  if (topic == judgments_.end()) return 0;
  std::size_t n = 0;
  for (const auto& [doc, g] : topic->second)
    if (g >= 1) ++n;
  return n;
}

std::vector<int> Qrels::positive_grades(int topic_id) const {
  std::vector<int> grades;
  auto topic = judgments_.find(topic_id);
  if (topic == judgments_.end()) return grades;
  for (const auto& [doc, g] : topic->second)
    if (g >= 1) grades.push_back(g);
  std::sort(grades.begin(), grades.end(), std::greater<int>());
  return grades;
}

const std::map<std::string, int>& Qrels::judgments(int topic_id) const {
  static const std::map<std::string, int> empty;
  auto topic = judgments_.find(topic_id);
  return topic == judgments_.end() ? empty : topic->second;
}

std::vector<int> Qrels::topics() const {
  std::vector<int> ids;
  ids.reserve(judgments_.size());
  for (const auto& [id, docs] : judgments_) ids.push_back(id);
  return ids;
}

std::size_t Qrels::size() const {
  std::size_t n = 0;
  for (const auto& [id, docs] : judgments_) n += docs.size();
  return n;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Drops <script>/<style> elements including their content (case-insensitive).
std::string drop_container_elements(std::string_view text) {
  std::string lower = lower_ascii(text);
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = std::string::npos;
    std::string_view close_tag;
    for (std::string_view name : {"script", "style"}) {
      std::size_t at = lower.find("<" + std::string(name), pos);
      if (at != std::string::npos && (open == std::string::npos || at < open)) {
        open = at;
        close_tag = name == "script" ? "</script" : "</style";
      }
    }
    if (open == std::string::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    std::size_t close = lower.find(close_tag, open);
    if (close == std::string::npos) break;  // unterminated: drop the rest
    std::size_t end = lower.find('>', close);
    pos = end == std::string::npos ? text.size() : end + 1;
  }
  return out;
}

std::string decode_entities(std::string_view text) {
  static const std::pair<std::string_view, char> entities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''},
  };
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == '&') {
      bool matched = false;
      for (const auto& [name, ch] : entities) {
        if (text.substr(pos, name.size()) == name) {
          out.push_back(ch);
          pos += name.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out.push_back(text[pos]);
    ++pos;
  }
  return out;
}

}  // namespace

std::string strip_html(std::string_view text) {
  std::string no_containers = drop_container_elements(text);
  std::string out;
  out.reserve(no_containers.size());
  bool in_tag = false;
  for (char c : no_containers) {
    if (in_tag) {
      if (c == '>') in_tag = false;
    } else if (c == '<') {
      in_tag = true;
    } else {
      out.push_back(c);
    }
  }
  return decode_entities(out);
}

namespace {

std::string read_all(std::istream& stream) {
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

// Inner content of the first <TAG>...</TAG> at or after `from`; npos-start
// pair when absent.
struct TagSpan {
  std::size_t begin = std::string::npos;
  std::size_t end = std::string::npos;  // content range [begin, end)
  std::size_t after = std::string::npos;
};

TagSpan find_tag(const std::string& text, std::string_view tag, std::size_t from,
                 std::size_t limit) {
  TagSpan span;
  std::string open = "<" + std::string(tag) + ">";
  std::string close = "</" + std::string(tag) + ">";
  std::size_t at = text.find(open, from);
  if (at == std::string::npos || at >= limit) return span;
  std::size_t content = at + open.size();
  std::size_t stop = text.find(close, content);
  if (stop == std::string::npos || stop > limit) return span;
  span.begin = content;
  span.end = stop;
  span.after = stop + close.size();
  return span;
}

std::vector<Document> parse_trec_sgml_docs(const std::string& data,
                                           const PipelineConfig& config) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = data.find("<DOC>", pos);
    if (open == std::string::npos) break;
    std::size_t close = data.find("</DOC>", open);
    if (close == std::string::npos)
      throw DataError("unterminated <DOC> block at byte offset " + std::to_string(open));
    std::size_t block_end = close + 6;

    TagSpan docno = find_tag(data, "DOCNO", open, close);
    if (docno.begin == std::string::npos)
      throw DataError("missing <DOCNO> in document block at byte offset " +
                      std::to_string(open));
    Document doc;
    doc.doc_id = trim(std::string_view(data).substr(docno.begin, docno.end - docno.begin));
    if (doc.doc_id.empty())
      throw DataError("empty DOCNO in document block at byte offset " + std::to_string(open));
    if (!seen.insert(doc.doc_id).second)
      throw DataError("duplicate DOCNO: " + doc.doc_id);

    std::string body;
    std::size_t cursor = open;
    while (true) {
      TagSpan text = find_tag(data, "TEXT", cursor, close);
      if (text.begin == std::string::npos) break;
      if (!body.empty()) body.push_back('\n');
      body.append(data, text.begin, text.end - text.begin);
      cursor = text.after;
    }
    doc.text = trim(strip_html(body));
    doc.length = tokenize(doc.text, config).size();
    docs.push_back(std::move(doc));
    pos = block_end;
  }
  return docs;
}

std::vector<Document> parse_jsonl_docs(const std::string& data, const PipelineConfig& config) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("doc_id") ||
        !record.contains("text"))
      throw DataError("malformed JSONL record at line " + std::to_string(line_no));
    Document doc;
    doc.doc_id = record["doc_id"].get<std::string>();
    if (doc.doc_id.empty())
      throw DataError("empty doc_id at line " + std::to_string(line_no));
    if (!seen.insert(doc.doc_id).second)
      throw DataError("duplicate DOCNO: " + doc.doc_id);
    doc.text = trim(strip_html(record["text"].get<std::string>()));
    doc.length = tokenize(doc.text, config).size();
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace

std::vector<Document> parse_trec_docs(std::istream& stream, DocFormat format,
                                      const PipelineConfig& config) {
  std::string data = read_all(stream);
  switch (format) {
    case DocFormat::trec_sgml:
      return parse_trec_sgml_docs(data, config);
    case DocFormat::jsonl:
      return parse_jsonl_docs(data, config);
  }
  throw DataError("unknown document format");
}

Topic make_topic(int topic_id, const std::string& title, const PipelineConfig& config) {
  if (topic_id <= 0)
    throw DataError("topic_id must be positive, got " + std::to_string(topic_id));
  Topic topic;
  topic.topic_id = topic_id;
  topic.title = title;
  topic.terms = tokenize(title, config);
  for (const auto& term : topic.terms) topic.qtf[term] += 1.0;
  return topic;
}

namespace {

int parse_topic_id(const std::string& raw, std::string_view where) {
  std::string cleaned = trim(raw);
  // Classic topic files render the field as "Number: 301".
  if (auto colon = cleaned.rfind(':'); colon != std::string::npos)
    cleaned = trim(cleaned.substr(colon + 1));
  if (cleaned.empty() || !std::all_of(cleaned.begin(), cleaned.end(), [](unsigned char c) {
        return std::isdigit(c);
      }))
    throw DataError("non-integer topic id \"" + cleaned + "\" in " + std::string(where));
  return std::stoi(cleaned);
}

// Field content after an open tag, up to the next tag or the block end.
// Classic TREC topic files omit closing tags for <num> and <title>.
std::string field_after(const std::string& data, std::string_view tag, std::size_t from,
                        std::size_t limit, bool* found) {
  std::string open = "<" + std::string(tag) + ">";
  std::size_t at = data.find(open, from);
  if (at == std::string::npos || at >= limit) {
    *found = false;
    return {};
  }
  std::size_t begin = at + open.size();
  std::size_t end = data.find('<', begin);
  if (end == std::string::npos || end > limit) end = limit;
  *found = true;
  return trim(std::string_view(data).substr(begin, end - begin));
}

std::vector<Topic> parse_trec_sgml_topics(const std::string& data,
                                          const PipelineConfig& config) {
  std::vector<Topic> topics;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = data.find("<top>", pos);
    if (open == std::string::npos) break;
    std::size_t close = data.find("</top>", open);
    if (close == std::string::npos)
      throw DataError("unterminated <top> block at byte offset " + std::to_string(open));

    bool found = false;
    std::string num = field_after(data, "num", open, close, &found);
    if (!found)
      throw DataError("missing <num> in topic block at byte offset " + std::to_string(open));
    int topic_id = parse_topic_id(num, "topic block");

    std::string title = field_after(data, "title", open, close, &found);
    if (!found)
      throw DataError("missing <title> in topic " + std::to_string(topic_id));
    topics.push_back(make_topic(topic_id, title, config));
    pos = close + 6;
  }
  return topics;
}

std::vector<Topic> parse_tsv_topics(const std::string& data, const PipelineConfig& config) {
  std::vector<Topic> topics;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("missing title column at line " + std::to_string(line_no));
    int topic_id = parse_topic_id(line.substr(0, tab), "line " + std::to_string(line_no));
    std::string title = trim(line.substr(tab + 1));
    if (title.empty())
      throw DataError("missing title at line " + std::to_string(line_no));
    topics.push_back(make_topic(topic_id, title, config));
  }
  return topics;
}

}  // namespace

std::vector<Topic> parse_topics(std::istream& stream, TopicFormat format,
                                const PipelineConfig& config) {
  std::string data = read_all(stream);
  switch (format) {
    case TopicFormat::trec_sgml:
      return parse_trec_sgml_topics(data, config);
    case TopicFormat::tsv:
      return parse_tsv_topics(data, config);
  }
  throw DataError("unknown topic format");
}

Qrels parse_qrels(std::istream& stream, std::size_t* overwrites) {
  Qrels qrels;
  std::size_t dup = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string topic, iteration, docno, grade, extra;
    if (!(fields >> topic)) continue;  // blank line
    if (!(fields >> iteration >> docno >> grade) || (fields >> extra))
      throw DataError("expected 4 columns at line " + std::to_string(line_no));
    int topic_id = parse_topic_id(topic, "line " + std::to_string(line_no));
    int rel = 0;
    try {
      rel = std::stoi(grade);
    } catch (const std::exception&) {
      throw DataError("non-integer relevance grade at line " + std::to_string(line_no));
    }
    if (rel < 0)
      throw DataError("negative relevance grade at line " + std::to_string(line_no));
    if (qrels.grade(topic_id, docno).has_value()) ++dup;
    qrels.add(topic_id, docno, rel);
  }
  if (overwrites) *overwrites = dup;
  return qrels;
}

}  // namespace semrank
