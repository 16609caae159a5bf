#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace ccurate {

enum class ArchiveFormat { warc, jsonl };

/// One fetched record with its crawl provenance.
struct RawRecord {
    std::string record_id;
    std::string target_url;
    std::string fetch_time;
    std::string content_type;
    std::string payload;
    std::string crawl_id;
};

struct ArchiveStats {
    std::size_t yielded = 0;
    std::size_t skipped_malformed = 0;
    std::size_t skipped_record_type = 0;
    std::size_t skipped_content_type = 0;
    std::size_t skipped_empty = 0;
};

/// Pull-based reader over WARC 1.0/1.1 (plain or gzip-per-record) or
/// line-delimited JSON. Holds at most one record in memory.
///
/// WARC: only `response` and `conversion` records with an HTML or plain-text
/// payload are yielded. Records with malformed headers are skipped and
/// counted; a record cut off by end-of-stream raises TruncatedArchiveError
/// once every complete record before it has been returned.
class ArchiveReader {
public:
    ArchiveReader(std::istream& in, ArchiveFormat format, std::string crawl_id = {});
    ~ArchiveReader();
    ArchiveReader(const ArchiveReader&) = delete;
    ArchiveReader& operator=(const ArchiveReader&) = delete;

    std::optional<RawRecord> next();
    const ArchiveStats& stats() const noexcept { return stats_; }

    /// Largest record body buffered so far, in bytes.
    std::size_t peak_record_bytes() const noexcept { return peak_record_bytes_; }

private:
    class ByteSource;

    std::optional<RawRecord> next_warc();
    std::optional<RawRecord> next_jsonl();

    std::unique_ptr<ByteSource> source_;
    ArchiveFormat format_;
    std::string crawl_id_;
    ArchiveStats stats_;
    std::optional<std::string> pending_line_;
    std::size_t line_number_ = 0;
    std::size_t peak_record_bytes_ = 0;
};

bool is_html_content_type(std::string_view content_type) noexcept;
bool is_text_content_type(std::string_view content_type) noexcept;
/// `charset=` parameter of a Content-Type value, lowercase; empty if absent.
std::string content_type_charset(std::string_view content_type);

} // namespace ccurate
