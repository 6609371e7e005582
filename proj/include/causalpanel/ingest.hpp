#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace causalpanel::ingest {

struct EpidemicSeries {
    std::string country;
    std::vector<std::string> dates; // strictly increasing, gap-free, daily
    std::vector<std::int64_t> cumulative_infections;
    std::vector<std::int64_t> cumulative_deaths;
};

struct CountryStats {
    std::string country;
    std::int64_t population = 0;
    double pct_over_65 = 0.0;
    double pct_single_households = 0.0;
    double pct_twitter_users = 0.0;
    std::optional<std::string> lockdown_date;
};

struct AttentionSeries {
    std::string country;
    std::vector<std::string> dates;
    std::vector<std::int64_t> tweet_counts;
    std::vector<double> avg_sentiment; // each in [-1, 1]
};

struct PanelRow {
    std::string country;
    std::string date;
    std::int64_t cumulative_infections = 0;
    std::int64_t cumulative_deaths = 0;
    std::int64_t tweet_count = 0;
    double avg_sentiment = 0.0;
    // Joined country statistics.
    std::int64_t population = 0;
    double pct_over_65 = 0.0;
    double pct_single_households = 0.0;
    double pct_twitter_users = 0.0;
    std::optional<std::string> lockdown_date;
};

// Dense country-by-day panel: exactly |countries| x |dates| rows, ordered by
// the given country order then by date.
struct RawPanel {
    std::vector<PanelRow> rows;
    std::vector<std::string> countries;
    std::string date_start;
    std::string date_end;
};

enum class EpidemicFormat { Tidy, JhuWide };

// Tidy schema: country,date,cumulative_infections,cumulative_deaths.
std::vector<EpidemicSeries> load_epidemic_series_tidy(const std::string& path);

// Wide schema: Province/State,Country/Region,Lat,Long,<M/D/YY>... with one
// cumulative count per date column; province rows are summed per country.
struct WideCounts {
    std::string country;
    std::vector<std::string> dates;
    std::vector<std::int64_t> counts;
};
std::vector<WideCounts> load_jhu_wide(const std::string& path);

// Pairs a confirmed-cases wide file with a deaths wide file.
std::vector<EpidemicSeries> load_epidemic_series_jhu(const std::string& confirmed_path,
                                                     const std::string& deaths_path);

std::vector<CountryStats> load_country_stats(const std::string& path);

// Tidy schema: country,date,tweet_count,avg_sentiment.
std::vector<AttentionSeries> load_attention_series(const std::string& path);

RawPanel assemble_panel(const std::vector<EpidemicSeries>& epidemic,
                        const std::vector<CountryStats>& stats,
                        const std::vector<AttentionSeries>& attention,
                        const std::vector<std::string>& countries,
                        const std::string& date_start, const std::string& date_end);

// Writes a panel back out in the three tidy input schemas (used by the
// simulator and the round-trip tests).
void write_panel_tidy(const RawPanel& panel, const std::string& epidemic_path,
                      const std::string& stats_path, const std::string& attention_path);

} // namespace causalpanel::ingest
