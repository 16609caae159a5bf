#include "ccurate/archive.hpp"

#include "ccurate/error.hpp"
#include "ccurate/text.hpp"
#include "ccurate/url.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <array>
#include <charconv>
#include <istream>
#include <map>

namespace ccurate {

// Buffered reader that transparently inflates gzip input, including
// concatenated gzip members (one per WARC record).
class ArchiveReader::ByteSource {
public:
    explicit ByteSource(std::istream& in) : in_(in) {
        const int b0 = in_.peek();
        if (b0 == 0x1f) {
            in_.get();
            const int b1 = in_.peek();
            in_.unget();
            gzip_ = b1 == 0x8b;
        }
        if (gzip_) {
            zs_ = {};
            if (inflateInit2(&zs_, 15 + 32) != Z_OK) {
                throw Error("zlib initialisation failed");
            }
        }
    }

    ~ByteSource() {
        if (gzip_) {
            inflateEnd(&zs_);
        }
    }

    ByteSource(const ByteSource&) = delete;
    ByteSource& operator=(const ByteSource&) = delete;

    /// Reads up to and excluding '\n'; strips a trailing '\r'. False at EOF
    /// with nothing read.
    bool read_line(std::string& line) {
        line.clear();
        bool any = false;
        while (true) {
            if (pos_ == buf_.size() && !fill()) {
                return any;
            }
            any = true;
            const auto begin = buf_.begin() + static_cast<std::ptrdiff_t>(pos_);
            const auto nl = std::find(begin, buf_.end(), '\n');
            line.append(begin, nl);
            if (nl != buf_.end()) {
                pos_ = static_cast<std::size_t>(nl - buf_.begin()) + 1;
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                return true;
            }
            pos_ = buf_.size();
        }
    }

    /// Appends up to `n` bytes to `out` (or discards them when `out` is null);
    /// returns the count actually consumed.
    std::size_t read(std::size_t n, std::string* out) {
        std::size_t done = 0;
        while (done < n) {
            if (pos_ == buf_.size() && !fill()) {
                break;
            }
            const std::size_t take = std::min(n - done, buf_.size() - pos_);
            if (out != nullptr) {
                out->append(buf_.data() + pos_, take);
            }
            pos_ += take;
            done += take;
        }
        return done;
    }

private:
    bool fill() {
        buf_.clear();
        pos_ = 0;
        if (!gzip_) {
            buf_.resize(kChunk);
            in_.read(buf_.data(), static_cast<std::streamsize>(kChunk));
            buf_.resize(static_cast<std::size_t>(in_.gcount()));
            return !buf_.empty();
        }
        buf_.resize(kChunk);
        while (true) {
            if (zs_.avail_in == 0) {
                in_.read(reinterpret_cast<char*>(in_buf_.data()), static_cast<std::streamsize>(in_buf_.size()));
                const auto got = static_cast<uInt>(in_.gcount());
                if (got == 0) {
                    buf_.clear();
                    if (mid_member_) {
                        throw TruncatedArchiveError("gzip member truncated");
                    }
                    return false;
                }
                zs_.next_in = in_buf_.data();
                zs_.avail_in = got;
            }
            zs_.next_out = reinterpret_cast<Bytef*>(buf_.data());
            zs_.avail_out = static_cast<uInt>(kChunk);
            mid_member_ = true;
            const int rc = inflate(&zs_, Z_NO_FLUSH);
            const std::size_t produced = kChunk - zs_.avail_out;
            if (rc == Z_STREAM_END) {
                mid_member_ = false;
                inflateReset(&zs_);
            } else if (rc != Z_OK && rc != Z_BUF_ERROR) {
                throw TruncatedArchiveError("corrupt gzip data");
            }
            if (produced > 0) {
                buf_.resize(produced);
                return true;
            }
        }
    }

    static constexpr std::size_t kChunk = 1 << 16;
    std::istream& in_;
    bool gzip_ = false;
    bool mid_member_ = false;
    z_stream zs_{};
    std::array<unsigned char, kChunk> in_buf_{};
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

namespace {

std::string media_type(std::string_view content_type) {
    auto semi = content_type.find(';');
    return text::ascii_lower(text::trim(content_type.substr(0, semi)));
}

bool is_version_line(std::string_view line) { return line == "WARC/1.0" || line == "WARC/1.1"; }

std::optional<std::size_t> parse_size(std::string_view s) {
    s = text::trim(s);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return value;
}

std::string dechunk(std::string_view body) {
    std::string out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        const auto eol = body.find('\n', pos);
        if (eol == std::string_view::npos) {
            break;
        }
        auto size_field = text::trim(body.substr(pos, eol - pos));
        size_field = size_field.substr(0, size_field.find(';'));
        std::size_t size = 0;
        const auto [ptr, ec] = std::from_chars(size_field.data(), size_field.data() + size_field.size(), size, 16);
        if (ec != std::errc{} || size == 0) {
            break;
        }
        pos = eol + 1;
        out.append(body.substr(pos, size));
        pos += size;
        while (pos < body.size() && (body[pos] == '\r' || body[pos] == '\n')) {
            ++pos;
        }
    }
    return out;
}

// Splits an HTTP response block into (content-type, body).
std::pair<std::string, std::string> split_http(std::string_view block) {
    std::size_t header_end = block.find("\r\n\r\n");
    std::size_t body_start = header_end == std::string_view::npos ? std::string_view::npos : header_end + 4;
    if (header_end == std::string_view::npos) {
        header_end = block.find("\n\n");
        body_start = header_end == std::string_view::npos ? std::string_view::npos : header_end + 2;
    }
    if (header_end == std::string_view::npos) {
        return {"", ""};
    }
    std::string content_type;
    bool chunked = false;
    std::size_t pos = block.find('\n');
    while (pos != std::string_view::npos && pos < header_end) {
        const std::size_t start = pos + 1;
        const std::size_t eol = block.find('\n', start);
        const auto line = text::trim(block.substr(start, (eol == std::string_view::npos ? block.size() : eol) - start));
        if (const auto colon = line.find(':'); colon != std::string_view::npos) {
            const auto name = text::ascii_lower(text::trim(line.substr(0, colon)));
            const auto value = text::trim(line.substr(colon + 1));
            if (name == "content-type") {
                content_type = std::string(value);
            } else if (name == "transfer-encoding" && text::ascii_lower(value).find("chunked") != std::string::npos) {
                chunked = true;
            }
        }
        pos = eol;
    }
    std::string body(block.substr(body_start));
    if (chunked) {
        body = dechunk(body);
    }
    return {content_type, body};
}

} // namespace

bool is_html_content_type(std::string_view content_type) noexcept {
    const auto mt = media_type(content_type);
    return mt == "text/html" || mt == "application/xhtml+xml";
}

bool is_text_content_type(std::string_view content_type) noexcept { return media_type(content_type) == "text/plain"; }

std::string content_type_charset(std::string_view content_type) {
    const std::string lower = text::ascii_lower(content_type);
    const auto at = lower.find("charset=");
    if (at == std::string::npos) {
        return {};
    }
    auto value = std::string_view(lower).substr(at + 8);
    value = value.substr(0, value.find(';'));
    value = text::trim(value);
    if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
        value = value.substr(1, value.size() >= 2 ? value.size() - 2 : 0);
    }
    return std::string(value);
}

ArchiveReader::ArchiveReader(std::istream& in, ArchiveFormat format, std::string crawl_id)
    : source_(std::make_unique<ByteSource>(in)), format_(format), crawl_id_(std::move(crawl_id)) {}

ArchiveReader::~ArchiveReader() = default;

std::optional<RawRecord> ArchiveReader::next() {
    return format_ == ArchiveFormat::warc ? next_warc() : next_jsonl();
}

std::optional<RawRecord> ArchiveReader::next_warc() {
    std::string line;
    while (true) {
        // Locate the version line of the next record.
        if (pending_line_) {
            line = std::move(*pending_line_);
            pending_line_.reset();
        } else {
            do {
                if (!source_->read_line(line)) {
                    return std::nullopt;
                }
            } while (line.empty());
        }

        auto resync = [&]() {
            ++stats_.skipped_malformed;
            while (source_->read_line(line)) {
                if (is_version_line(line)) {
                    pending_line_ = line;
                    return;
                }
            }
        };

        if (!is_version_line(line)) {
            resync();
            continue;
        }

        std::map<std::string, std::string> headers;
        bool malformed = false;
        bool terminated = false;
        while (source_->read_line(line)) {
            if (line.empty()) {
                terminated = true;
                break;
            }
            const auto colon = line.find(':');
            if (colon == std::string::npos || colon == 0) {
                malformed = true;
                break;
            }
            headers[text::ascii_lower(text::trim(std::string_view(line).substr(0, colon)))] =
                std::string(text::trim(std::string_view(line).substr(colon + 1)));
        }
        if (!malformed && !terminated) {
            throw TruncatedArchiveError("WARC header cut off by end of stream");
        }
        const auto declared = headers.contains("content-length") ? parse_size(headers["content-length"]) : std::nullopt;
        if (malformed || !declared || !headers.contains("warc-type")) {
            resync();
            continue;
        }

        const std::string type = text::ascii_lower(headers["warc-type"]);
        const bool wanted = type == "response" || type == "conversion";
        const std::size_t length = *declared;
        std::string block;
        const std::size_t got = source_->read(length, wanted ? &block : nullptr);
        if (got < length) {
            throw TruncatedArchiveError("WARC record body cut off by end of stream");
        }
        peak_record_bytes_ = std::max(peak_record_bytes_, block.size());
        if (!wanted) {
            ++stats_.skipped_record_type;
            continue;
        }

        const auto target = parse_absolute_url(headers["warc-target-uri"]);
        if (!target) {
            ++stats_.skipped_malformed;
            continue;
        }

        RawRecord record;
        record.record_id = headers["warc-record-id"];
        record.target_url = target->to_string();
        record.fetch_time = headers["warc-date"];
        record.crawl_id = crawl_id_;
        if (type == "response") {
            if (media_type(headers["content-type"]).rfind("application/http", 0) == 0) {
                auto [ct, body] = split_http(block);
                record.content_type = std::move(ct);
                record.payload = std::move(body);
            } else {
                record.content_type = headers["content-type"];
                record.payload = std::move(block);
            }
        } else {
            record.content_type = headers.contains("content-type") ? headers["content-type"] : "text/plain";
            record.payload = std::move(block);
        }
        if (!is_html_content_type(record.content_type) && !is_text_content_type(record.content_type)) {
            ++stats_.skipped_content_type;
            continue;
        }
        if (record.payload.empty()) {
            ++stats_.skipped_empty;
            continue;
        }
        ++stats_.yielded;
        return record;
    }
}

std::optional<RawRecord> ArchiveReader::next_jsonl() {
    std::string line;
    while (source_->read_line(line)) {
        ++line_number_;
        if (text::trim(line).empty()) {
            continue;
        }
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("url") || !j["url"].is_string()) {
            ++stats_.skipped_malformed;
            continue;
        }
        const auto target = parse_absolute_url(j["url"].get<std::string>());
        if (!target) {
            ++stats_.skipped_malformed;
            continue;
        }
        RawRecord record;
        record.target_url = target->to_string();
        const auto str = [&](const char* key) {
            auto it = j.find(key);
            return it != j.end() && it->is_string() ? it->get<std::string>() : std::string{};
        };
        record.record_id = str("id").empty() ? (str("doc_id").empty() ? std::to_string(line_number_) : str("doc_id"))
                                             : str("id");
        record.fetch_time = str("fetch_time");
        record.crawl_id = str("crawl_id").empty() ? crawl_id_ : str("crawl_id");
        if (j.contains("html")) {
            record.payload = str("html");
            record.content_type = str("content_type").empty() ? "text/html" : str("content_type");
        } else {
            record.payload = str("text");
            record.content_type = str("content_type").empty() ? "text/plain" : str("content_type");
        }
        if (!is_html_content_type(record.content_type) && !is_text_content_type(record.content_type)) {
            ++stats_.skipped_content_type;
            continue;
        }
        if (record.payload.empty()) {
            ++stats_.skipped_empty;
            continue;
        }
        peak_record_bytes_ = std::max(peak_record_bytes_, record.payload.size());
        ++stats_.yielded;
        return record;
    }
    return std::nullopt;
}

} // namespace ccurate
