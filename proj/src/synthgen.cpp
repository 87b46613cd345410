#include "ctalab/synthgen.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <json.hpp>

#include "ctalab/error.hpp"
#include "ctalab/fingerprint.hpp"
#include "ctalab/rng.hpp"

namespace ctalab {

namespace {

using WordList = std::vector<const char*>;

const WordList kCities = {
    "London",  "Boston",   "Seattle",  "Tokyo",    "Paris",    "Berlin",
    "Madrid",  "Rome",     "Vienna",   "Prague",   "Lisbon",   "Dublin",
    "Oslo",    "Helsinki", "Warsaw",   "Athens",   "Cairo",    "Nairobi",
    "Lagos",   "Mumbai",   "Delhi",    "Bangkok",  "Singapore", "Sydney",
    "Auckland", "Toronto",  "Vancouver", "Chicago", "Denver",   "Houston",
    "Phoenix", "Atlanta",  "Miami",    "Dallas",   "Portland", "Austin",
    "Havana",  "Lima",     "Bogota",   "Santiago", "Brasilia", "Montevideo",
    "Reykjavik", "Copenhagen", "Stockholm", "Brussels", "Amsterdam", "Geneva",
};

const WordList kCountryCodes = {
    "US", "GB", "CA", "DE", "FR", "ES", "IT", "PT", "IE", "NL", "BE", "CH",
    "AT", "CZ", "PL", "GR", "EG", "KE", "NG", "IN", "TH", "SG", "AU", "NZ",
    "JP", "KR", "CN", "BR", "AR", "CL", "PE", "CO", "UY", "IS", "DK", "SE",
    "NO", "FI", "MX", "CU",
};

const WordList kFirstNames = {
    "Ava",    "Liam",   "Noah",  "Emma",  "Mia",    "Ethan", "Lucas", "Olivia",
    "Sophia", "Mason",  "Amelia", "Elijah", "Harper", "James", "Evelyn", "Henry",
    "Jack",   "Ella",   "Owen",  "Grace", "Leo",    "Chloe", "Ryan",  "Zoe",
    "Nora",   "Caleb",  "Hazel", "Isaac", "Violet", "Miles", "Ruby",  "Felix",
};

const WordList kLastNames = {
    "Smith",  "Johnson", "Brown",  "Taylor", "Wilson",  "Davies", "Evans",
    "Thomas", "Roberts", "Walker", "Wright", "Green",   "Hall",   "Wood",
    "Clarke", "Hughes",  "Baker",  "Carter", "Turner",  "Moore",  "Parker",
    "Cook",   "Bell",    "Murphy", "Bailey", "Rivera",  "Nguyen", "Patel",
    "Kim",    "Sato",    "Garcia", "Silva",
};

const WordList kDomains = {
    "example",  "datamail", "tableworks", "acmecorp", "northwind", "initech",
    "globex",   "umbrella", "hooli",      "stark",    "wayne",     "wonka",
    "cyberdyne", "tyrell",  "aperture",   "vandelay",
};

const WordList kTlds = {"com", "org", "net", "io"};

const WordList kPathWords = {
    "home",   "about",  "products", "pricing", "blog",   "docs",   "support",
    "careers", "team",  "contact",  "news",    "events", "faq",    "login",
    "signup", "search", "catalog",  "orders",  "reports", "metrics", "status",
    "archive", "gallery", "downloads", "terms", "privacy", "help",  "api",
    "dashboard", "settings", "profile", "forum",
};

const WordList kColors = {
    "red",    "orange", "yellow", "green", "blue",   "purple", "violet",
    "teal",   "cyan",   "magenta", "pink",  "brown",  "black",  "white",
    "gray",   "silver", "gold",   "maroon", "navy",   "olive",  "beige",
    "coral",  "indigo", "crimson",
};

const WordList kBooleans = {"true", "false", "yes", "no"};

const WordList kLexicon = {
    "quarterly", "report",   "pending",  "review",   "for",      "northern",
    "region",    "shipment", "delayed",  "due",      "to",       "weather",
    "customer",  "feedback", "collected", "during",  "survey",   "window",
    "inventory", "count",    "verified", "by",       "warehouse", "staff",
    "meeting",   "notes",    "shared",   "with",     "project",  "team",
    "invoice",   "approved", "after",    "manual",   "check",    "budget",
    "forecast",  "updated",  "this",     "cycle",    "supplier", "contract",
    "renewal",   "under",    "legal",    "analysis", "final",    "draft",
    "submitted", "before",   "deadline", "annual",   "audit",    "findings",
    "summarized", "in",      "appendix", "release",  "candidate", "passed",
    "regression", "suite",   "onboarding", "material", "revised", "new",
    "hires",     "maintenance", "scheduled", "overnight", "backup", "restore",
    "tested",    "on",       "staging",  "cluster",  "roadmap",  "priorities",
    "ranked",    "planning", "session",  "travel",   "expenses", "reimbursed",
    "last",      "month",    "training", "completed", "all",     "agents",
};

const WordList kAreaCodes = {
    "202", "212", "213", "305", "312", "404", "415", "512", "604", "617",
    "646", "702", "713", "718", "773", "206", "303", "503", "602", "619",
    "214", "281", "407", "480",
};

const WordList kPhoneTails = {
    "0100", "0101", "0102", "0103", "0104", "0105", "0106", "0107", "0108",
    "0109", "0110", "0111", "0112", "0113", "0114", "0115", "0116", "0117",
    "0118", "0119", "0120", "0121", "0122", "0123", "0124", "0125", "0126",
    "0127", "0128", "0129", "0130", "0131",
};

const WordList kIsbnMids = {
    "306", "140", "201", "262", "321", "385", "400", "415", "451", "465",
    "521", "534", "553", "590", "604", "671", "684", "691", "712", "743",
    "765", "807", "811", "826", "843", "878", "886", "899", "907", "931",
    "946", "979",
};

const WordList kIsbnTails = {
    "40615", "18244", "52648", "09372", "61584", "27490", "83157", "74926",
    "35061", "96283", "50417", "12839", "68204", "91375", "24958", "80631",
    "47092", "73514", "06827", "59340", "31786", "84269", "15903", "62478",
    "98012", "43657", "70128", "26594", "89361", "54703", "01246", "37815",
};

const WordList kPriceCents = {"00", "25", "49", "50", "75", "95", "99"};

const char* pick(const WordList& list, Rng& rng) {
  return list[static_cast<std::size_t>(rng.next_below(list.size()))];
}

std::string two_digits(std::uint64_t v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

std::string generate_value(const std::string& kind, Rng& rng) {
  if (kind == "city") return pick(kCities, rng);
  if (kind == "country_code") return pick(kCountryCodes, rng);
  if (kind == "date") {
    return std::to_string(2000 + rng.next_below(30)) + "-" +
           two_digits(1 + rng.next_below(12)) + "-" + two_digits(1 + rng.next_below(28));
  }
  if (kind == "email") {
    return std::string(pick(kFirstNames, rng)) + "." + pick(kLastNames, rng) + "@" +
           pick(kDomains, rng) + "." + pick(kTlds, rng);
  }
  if (kind == "price") {
    return "$" + std::to_string(1 + rng.next_below(199)) + "." + pick(kPriceCents, rng);
  }
  if (kind == "person_name") {
    return std::string(pick(kFirstNames, rng)) + " " + pick(kLastNames, rng);
  }
  if (kind == "phone") {
    return "(" + std::string(pick(kAreaCodes, rng)) + ") 555-" + pick(kPhoneTails, rng);
  }
  if (kind == "url") {
    return "https://www." + std::string(pick(kDomains, rng)) + "." + pick(kTlds, rng) +
           "/" + pick(kPathWords, rng);
  }
  if (kind == "boolean") return pick(kBooleans, rng);
  if (kind == "color") return pick(kColors, rng);
  if (kind == "isbn") {
    return "978-" + std::to_string(rng.next_below(10)) + "-" + pick(kIsbnMids, rng) +
           "-" + pick(kIsbnTails, rng) + "-" + std::to_string(rng.next_below(10));
  }
  if (kind == "free_text") {
    const auto words = 4 + rng.next_below(5);
    std::string out;
    for (std::uint64_t w = 0; w < words; ++w) {
      if (w) out.push_back(' ');
      out += pick(kLexicon, rng);
    }
    return out;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown generator kind '" + kind + "'");
}

// Largest-remainder split of `total` into 70/15/15; ties favor earlier splits.
std::array<int, 3> split_counts(int total) {
  const std::array<double, 3> weights = {0.70, 0.15, 0.15};
  std::array<int, 3> alloc{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = weights[static_cast<std::size_t>(i)] * total;
    alloc[static_cast<std::size_t>(i)] = static_cast<int>(quota);
    remainder[static_cast<std::size_t>(i)] = quota - alloc[static_cast<std::size_t>(i)];
    assigned += alloc[static_cast<std::size_t>(i)];
  }
  for (int left = total - assigned; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainder[static_cast<std::size_t>(i)] >
          remainder[static_cast<std::size_t>(best)] + 1e-12) {
        best = i;
      }
    }
    ++alloc[static_cast<std::size_t>(best)];
    remainder[static_cast<std::size_t>(best)] -= 1.0;
  }
  return alloc;
}

void validate(const GeneratorSpec& spec) {
  if (spec.recipes.size() < 2) {
    throw Error(ErrorCode::InvalidSpec, "need at least 2 labels");
  }
  if (spec.columns_per_label < 1) {
    throw Error(ErrorCode::InvalidSpec, "columns_per_label must be >= 1");
  }
  if (spec.rows_min < 1 || spec.rows_max < spec.rows_min) {
    throw Error(ErrorCode::InvalidSpec, "rows range must satisfy 1 <= min <= max");
  }
  if (spec.columns_per_table < 1) {
    throw Error(ErrorCode::InvalidSpec, "columns_per_table must be >= 1");
  }
  std::set<std::string> seen;
  Rng probe(0);
  for (const auto& recipe : spec.recipes) {
    if (!seen.insert(recipe.label).second) {
      throw Error(ErrorCode::InvalidSpec, "duplicate label '" + recipe.label + "'");
    }
    generate_value(recipe.kind, probe);  // throws InvalidSpec on unknown kind
  }
}

}  // namespace

const std::vector<std::string> kGeneratorKinds = {
    "city", "country_code", "date",  "email", "price", "person_name",
    "phone", "url",         "boolean", "color", "isbn", "free_text",
};

GeneratorSpec default_generator_spec(int columns_per_label, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.recipes = {
      {"City", "city"},
      {"Country Code", "country_code"},
      {"Date", "date"},
      {"Email", "email"},
      {"Price", "price"},
      {"Person Name", "person_name"},
      {"Phone", "phone"},
      {"URL", "url"},
      {"Boolean", "boolean"},
      {"Color", "color"},
      {"Book Id", "isbn"},
      {"Description", "free_text"},
  };
  spec.columns_per_label = columns_per_label;
  spec.seed = seed;
  return spec;
}

GeneratorSpec generator_spec_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("bad generator json: ") + e.what());
  }
  GeneratorSpec spec = default_generator_spec();
  if (j.contains("labels")) {
    spec.recipes.clear();
    for (const auto& item : j.at("labels")) {
      spec.recipes.push_back({item.at("name").get<std::string>(),
                              item.at("kind").get<std::string>()});
    }
  }
  spec.columns_per_label = j.value("columns_per_label", spec.columns_per_label);
  spec.rows_min = j.value("rows_min", spec.rows_min);
  spec.rows_max = j.value("rows_max", spec.rows_max);
  spec.columns_per_table = j.value("columns_per_table", spec.columns_per_table);
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

std::string generator_spec_to_json(const GeneratorSpec& spec) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& recipe : spec.recipes) {
    labels.push_back({{"name", recipe.label}, {"kind", recipe.kind}});
  }
  nlohmann::json j = {
      {"labels", labels},
      {"columns_per_label", spec.columns_per_label},
      {"rows_min", spec.rows_min},
      {"rows_max", spec.rows_max},
      {"columns_per_table", spec.columns_per_table},
      {"seed", spec.seed},
  };
  return j.dump();
}

CorpusSplit generate_corpus(const GeneratorSpec& spec) {
  validate(spec);

  CorpusSplit corpus;
  std::vector<std::string> labels;
  for (const auto& recipe : spec.recipes) labels.push_back(recipe.label);
  corpus.label_space = LabelSpace(labels);
  corpus.fingerprint = config_fingerprint(generator_spec_to_json(spec));

  const auto counts = split_counts(spec.columns_per_label);
  int global_column = 0;
  const auto table_id = [&](int index) {
    std::string n = std::to_string(index);
    return "t" + std::string(n.size() < 4 ? 4 - n.size() : 0, '0') + n;
  };

  for (std::size_t li = 0; li < spec.recipes.size(); ++li) {
    const auto& recipe = spec.recipes[li];
    // Per-label stream: parallel and serial generation agree.
    Rng rng(derive_seed(spec.seed, {"label", std::to_string(li)}));
    for (int c = 0; c < spec.columns_per_label; ++c) {
      const int rows = spec.rows_min +
                       static_cast<int>(rng.next_below(
                           static_cast<std::uint64_t>(spec.rows_max - spec.rows_min + 1)));
      LabeledColumn lc;
      lc.label = recipe.label;
      lc.column.table_id = table_id(global_column / spec.columns_per_table);
      lc.column.column_index = global_column % spec.columns_per_table;
      ++global_column;
      lc.column.values.reserve(static_cast<std::size_t>(rows));
      for (int r = 0; r < rows; ++r) {
        lc.column.values.push_back(generate_value(recipe.kind, rng));
      }
      if (c < counts[0]) {
        corpus.train.push_back(std::move(lc));
      } else if (c < counts[0] + counts[1]) {
        corpus.validation.push_back(std::move(lc));
      } else {
        corpus.test.push_back(std::move(lc));
      }
    }
  }
  return corpus;
}

}  // namespace ctalab
