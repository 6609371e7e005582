#include "causalpanel/ingest.hpp"

#include "causalpanel/csv.hpp"
#include "causalpanel/dates.hpp"
#include "causalpanel/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

namespace causalpanel::ingest {

namespace {

void require_header(const csv::Table& t, const std::vector<std::string>& expected,
                    const std::string& path) {
    if (t.header != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want.push_back(',');
            want += expected[i];
        }
        throw MalformedCsv("'" + path + "': expected header '" + want + "'");
    }
}

// Groups rows by the country in column 0, preserving first-appearance order,
// and date-sorts each group by column 1.
std::vector<std::pair<std::string, std::vector<const std::vector<std::string>*>>>
group_by_country(const csv::Table& t) {
    std::vector<std::pair<std::string, std::vector<const std::vector<std::string>*>>> groups;
    std::map<std::string, std::size_t> where;
    for (const auto& row : t.rows) {
        const std::string& country = row[0];
        auto it = where.find(country);
        if (it == where.end()) {
            where.emplace(country, groups.size());
            groups.push_back({country, {}});
            it = where.find(country);
        }
        groups[it->second].second.push_back(&row);
    }
    for (auto& [country, rows] : groups) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto* a, const auto* b) { return (*a)[1] < (*b)[1]; });
    }
    return groups;
}

void check_date_axis(const std::string& country, const std::vector<std::string>& axis) {
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!dates::is_valid_iso(axis[i]))
            throw MalformedCsv(country + ": bad date '" + axis[i] + "'");
        if (i == 0) continue;
        if (axis[i] == axis[i - 1])
            throw MalformedCsv(country + ": duplicate date " + axis[i]);
        const long long gap = dates::days_between(axis[i - 1], axis[i]);
        if (gap != 1)
            throw DateGap(country + " jumps from " + axis[i - 1] + " to " + axis[i]);
    }
}

} // namespace

std::vector<EpidemicSeries> load_epidemic_series_tidy(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    require_header(t, {"country", "date", "cumulative_infections", "cumulative_deaths"}, path);

    std::vector<EpidemicSeries> out;
    for (const auto& [country, rows] : group_by_country(t)) {
        EpidemicSeries s;
        s.country = country;
        for (const auto* row : rows) {
            s.dates.push_back((*row)[1]);
            s.cumulative_infections.push_back(csv::parse_int((*row)[2], country));
            s.cumulative_deaths.push_back(csv::parse_int((*row)[3], country));
        }
        check_date_axis(country, s.dates);
        for (std::size_t i = 0; i < s.dates.size(); ++i) {
            if (s.cumulative_infections[i] < 0 || s.cumulative_deaths[i] < 0)
                throw MalformedCsv(country + " " + s.dates[i] + ": negative count");
            if (i == 0) continue;
            if (s.cumulative_infections[i] < s.cumulative_infections[i - 1])
                throw NonMonotoneCumulative("infections for " + country + " at " + s.dates[i]);
            if (s.cumulative_deaths[i] < s.cumulative_deaths[i - 1])
                throw NonMonotoneCumulative("deaths for " + country + " at " + s.dates[i]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<WideCounts> load_jhu_wide(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.size() < 5 || t.header[0] != "Province/State" ||
        t.header[1] != "Country/Region" || t.header[2] != "Lat" || t.header[3] != "Long")
        throw MalformedCsv("'" + path + "': expected wide header "
                           "'Province/State,Country/Region,Lat,Long,<dates>'");

    std::vector<std::string> axis;
    for (std::size_t c = 4; c < t.header.size(); ++c) axis.push_back(dates::from_mdy(t.header[c]));

    std::vector<WideCounts> out;
    std::map<std::string, std::size_t> where;
    for (const auto& row : t.rows) {
        const std::string& country = row[1];
        auto it = where.find(country);
        if (it == where.end()) {
            where.emplace(country, out.size());
            out.push_back({country, axis, std::vector<std::int64_t>(axis.size(), 0)});
            it = where.find(country);
        }
        auto& counts = out[it->second].counts;
        for (std::size_t c = 4; c < row.size(); ++c)
            counts[c - 4] += csv::parse_int(row[c], country);
    }
    for (const auto& w : out) check_date_axis(w.country, w.dates);
    return out;
}

std::vector<EpidemicSeries> load_epidemic_series_jhu(const std::string& confirmed_path,
                                                     const std::string& deaths_path) {
    const auto confirmed = load_jhu_wide(confirmed_path);
    const auto deaths = load_jhu_wide(deaths_path);

    std::map<std::string, const WideCounts*> deaths_by_country;
    for (const auto& w : deaths) deaths_by_country.emplace(w.country, &w);

    std::vector<EpidemicSeries> out;
    for (const auto& conf : confirmed) {
        const auto it = deaths_by_country.find(conf.country);
        if (it == deaths_by_country.end())
            throw MissingCountry(conf.country + " absent from '" + deaths_path + "'");
        const WideCounts& dead = *it->second;
        if (dead.dates != conf.dates)
            throw MalformedCsv("date axes differ between wide files for " + conf.country);

        EpidemicSeries s;
        s.country = conf.country;
        s.dates = conf.dates;
        s.cumulative_infections = conf.counts;
        s.cumulative_deaths = dead.counts;
        for (std::size_t i = 1; i < s.dates.size(); ++i) {
            if (s.cumulative_infections[i] < s.cumulative_infections[i - 1])
                throw NonMonotoneCumulative("infections for " + s.country + " at " + s.dates[i]);
            if (s.cumulative_deaths[i] < s.cumulative_deaths[i - 1])
                throw NonMonotoneCumulative("deaths for " + s.country + " at " + s.dates[i]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CountryStats> load_country_stats(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    require_header(t,
                   {"country", "population", "pct_over_65", "pct_single_households",
                    "pct_twitter_users", "lockdown_date"},
                   path);
    std::vector<CountryStats> out;
    std::map<std::string, int> seen;
    for (const auto& row : t.rows) {
        CountryStats s;
        s.country = row[0];
        if (seen.count(s.country)) throw DuplicateCountry(s.country);
        seen[s.country] = 1;
        s.population = csv::parse_int(row[1], s.country);
        if (s.population <= 0) throw MalformedCsv(s.country + ": population must be positive");
        s.pct_over_65 = csv::parse_double(row[2], s.country);
        s.pct_single_households = csv::parse_double(row[3], s.country);
        s.pct_twitter_users = csv::parse_double(row[4], s.country);
        for (double frac : {s.pct_over_65, s.pct_single_households, s.pct_twitter_users}) {
            if (!(frac >= 0.0 && frac <= 1.0))
                throw OutOfRangeFraction(s.country + ": " + csv::format_double(frac));
        }
        if (!row[5].empty()) {
            if (!dates::is_valid_iso(row[5]))
                throw MalformedCsv(s.country + ": bad lockdown_date '" + row[5] + "'");
            s.lockdown_date = row[5];
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<AttentionSeries> load_attention_series(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    require_header(t, {"country", "date", "tweet_count", "avg_sentiment"}, path);

    std::vector<AttentionSeries> out;
    for (const auto& [country, rows] : group_by_country(t)) {
        AttentionSeries s;
        s.country = country;
        for (const auto* row : rows) {
            s.dates.push_back((*row)[1]);
            const std::int64_t count = csv::parse_int((*row)[2], country);
            if (count < 0) throw MalformedCsv(country + ": negative tweet count");
            s.tweet_counts.push_back(count);
            const double sentiment = csv::parse_double((*row)[3], country);
            if (!(sentiment >= -1.0 && sentiment <= 1.0))
                throw SentimentOutOfRange(country + " " + (*row)[1] + ": " +
                                          csv::format_double(sentiment));
            s.avg_sentiment.push_back(sentiment);
        }
        check_date_axis(country, s.dates);
        out.push_back(std::move(s));
    }
    return out;
}

RawPanel assemble_panel(const std::vector<EpidemicSeries>& epidemic,
                        const std::vector<CountryStats>& stats,
                        const std::vector<AttentionSeries>& attention,
                        const std::vector<std::string>& countries,
                        const std::string& date_start, const std::string& date_end) {
    std::map<std::string, const EpidemicSeries*> epi_by;
    for (const auto& s : epidemic) epi_by.emplace(s.country, &s);
    std::map<std::string, const CountryStats*> stats_by;
    for (const auto& s : stats) stats_by.emplace(s.country, &s);
    std::map<std::string, const AttentionSeries*> att_by;
    for (const auto& s : attention) att_by.emplace(s.country, &s);

    const auto axis = dates::range_inclusive(date_start, date_end);

    RawPanel panel;
    panel.countries = countries;
    panel.date_start = date_start;
    panel.date_end = date_end;
    panel.rows.reserve(countries.size() * axis.size());

    for (const auto& country : countries) {
        const auto ei = epi_by.find(country);
        if (ei == epi_by.end()) throw MissingCountry(country + " (epidemic input)");
        const auto si = stats_by.find(country);
        if (si == stats_by.end()) throw MissingCountry(country + " (country stats input)");
        const auto ai = att_by.find(country);
        if (ai == att_by.end()) throw MissingCountry(country + " (attention input)");

        const EpidemicSeries& epi = *ei->second;
        const AttentionSeries& att = *ai->second;
        const CountryStats& cs = *si->second;

        // Both series have dense axes, so coverage reduces to an offset check.
        auto offset_of = [&](const std::vector<std::string>& ds, const char* what) {
            const auto it = std::lower_bound(ds.begin(), ds.end(), date_start);
            if (it == ds.end() || *it != date_start)
                throw MissingDateCoverage(country + " lacks " + date_start + " (" + what + ")");
            const std::size_t off = static_cast<std::size_t>(it - ds.begin());
            if (off + axis.size() > ds.size())
                throw MissingDateCoverage(country + " lacks " + ds.back() + " onward (" +
                                          what + "): first missing day is " +
                                          dates::next_day(ds.back()));
            return off;
        };
        const std::size_t eo = offset_of(epi.dates, "epidemic");
        const std::size_t ao = offset_of(att.dates, "attention");

        for (std::size_t d = 0; d < axis.size(); ++d) {
            PanelRow row;
            row.country = country;
            row.date = axis[d];
            row.cumulative_infections = epi.cumulative_infections[eo + d];
            row.cumulative_deaths = epi.cumulative_deaths[eo + d];
            row.tweet_count = att.tweet_counts[ao + d];
            row.avg_sentiment = att.avg_sentiment[ao + d];
            row.population = cs.population;
            row.pct_over_65 = cs.pct_over_65;
            row.pct_single_households = cs.pct_single_households;
            row.pct_twitter_users = cs.pct_twitter_users;
            row.lockdown_date = cs.lockdown_date;
            panel.rows.push_back(std::move(row));
        }
    }
    return panel;
}

void write_panel_tidy(const RawPanel& panel, const std::string& epidemic_path,
                      const std::string& stats_path, const std::string& attention_path) {
    std::ofstream epi(epidemic_path);
    std::ofstream att(attention_path);
    std::ofstream sta(stats_path);
    if (!epi || !att || !sta) throw IoError("cannot write panel CSVs");

    epi << "country,date,cumulative_infections,cumulative_deaths\n";
    att << "country,date,tweet_count,avg_sentiment\n";
    for (const auto& row : panel.rows) {
        epi << csv::join_fields({row.country, row.date,
                                 std::to_string(row.cumulative_infections),
                                 std::to_string(row.cumulative_deaths)})
            << "\n";
        att << csv::join_fields({row.country, row.date, std::to_string(row.tweet_count),
                                 csv::format_double(row.avg_sentiment)})
            << "\n";
    }

    sta << "country,population,pct_over_65,pct_single_households,pct_twitter_users,"
           "lockdown_date\n";
    std::size_t idx = 0;
    const std::size_t days = panel.countries.empty() ? 0 : panel.rows.size() / panel.countries.size();
    for (const auto& country : panel.countries) {
        const PanelRow& row = panel.rows[idx];
        sta << csv::join_fields({country, std::to_string(row.population),
                                 csv::format_double(row.pct_over_65),
                                 csv::format_double(row.pct_single_households),
                                 csv::format_double(row.pct_twitter_users),
                                 row.lockdown_date.value_or("")})
            << "\n";
        idx += days;
    }
}

} // namespace causalpanel::ingest
