#include <algorithm>

#include "doctest.h"

#include "newsforge/numerics.hpp"
#include "newsforge/textprep.hpp"
#include "testutil.hpp"

using namespace newsforge;

TEST_CASE("remove_punctuation basics") {
    CHECK(remove_punctuation("Hello, world!") == "Hello world");
    CHECK(remove_punctuation("") == "");
    CHECK(remove_punctuation("Visit http://x.co now, 100% true!!!") == "Visit now true");
    CHECK(remove_punctuation("a-b_c.d") == "a b c d");
    CHECK(remove_punctuation("  spaced   out  ") == "spaced out");
}

TEST_CASE("remove_punctuation handles urls, digits and unicode punctuation") {
    CHECK(remove_punctuation("go to www.example.com for more") == "go to for more");
    CHECK(remove_punctuation("see (http://a.b/c?d=1) here") == "see here");
    CHECK(remove_punctuation("room 101 has 2 beds") == "room has beds");
    CHECK(remove_punctuation("covid19 wave") == "covid wave");
    // curly quotes and a em dash (general punctuation block)
    CHECK(remove_punctuation("“quoted” — text…") == "quoted text");
    // digits survive when the url/number pass is disabled
    CHECK(remove_punctuation("room 101!", false) == "room 101");
}

TEST_CASE("lowercase: fixtures and fixed points") {
    CHECK(lowercase("FAKE News") == "fake news");
    CHECK(lowercase("ß") == "ß");
    CHECK(lowercase("ÀÉÎÕÜ") == "àéîõü");
    CHECK(lowercase("ΑΒΓΩ") == "αβγω");
    CHECK(lowercase("ЖУРНАЛ") == "журнал");
    CHECK(lowercase("") == "");
}

TEST_CASE("lowercase is idempotent on generated inputs") {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        const std::size_t len = rng.bounded(30);
        for (std::size_t i = 0; i < len; ++i) {
            switch (rng.bounded(4)) {
                case 0: s.push_back(static_cast<char>('A' + rng.bounded(26))); break;
                case 1: s.push_back(static_cast<char>('a' + rng.bounded(26))); break;
                case 2: s += "É";  break;  // É
                default: s += "Ж"; break;  // Ж
            }
        }
        const std::string once = lowercase(s);
        CHECK(lowercase(once) == once);
    }
}

TEST_CASE("porter stemmer fixtures") {
    // step 1a
    CHECK(stem("caresses") == "caress");
    CHECK(stem("ponies") == "poni");
    CHECK(stem("ties") == "ti");
    CHECK(stem("caress") == "caress");
    CHECK(stem("cats") == "cat");
    // step 1b and its cleanup
    CHECK(stem("feed") == "feed");
    CHECK(stem("plastered") == "plaster");
    CHECK(stem("bled") == "bled");
    CHECK(stem("motoring") == "motor");
    CHECK(stem("sing") == "sing");
    CHECK(stem("hopping") == "hop");
    CHECK(stem("tanned") == "tan");
    CHECK(stem("falling") == "fall");
    CHECK(stem("hissing") == "hiss");
    CHECK(stem("fizzed") == "fizz");
    CHECK(stem("failing") == "fail");
    CHECK(stem("filing") == "file");
    CHECK(stem("running") == "run");
    // step 1c
    CHECK(stem("happy") == "happi");
    CHECK(stem("sky") == "sky");
    // multi-step chains
    CHECK(stem("relational") == "relat");
    CHECK(stem("conditional") == "condit");
    CHECK(stem("rational") == "ration");
    CHECK(stem("generalizations") == "gener");
    CHECK(stem("oscillators") == "oscil");
    CHECK(stem("adjustable") == "adjust");
    CHECK(stem("dependent") == "depend");
    // short words and already-stemmed words pass through
    CHECK(stem("run") == "run");
    CHECK(stem("a") == "a");
    CHECK(stem("be") == "be");
    // non-ascii and non-lowercase tokens are untouched
    CHECK(stem("café") == "café");
    CHECK(stem("Running") == "Running");
    CHECK(stem("") == "");
}

TEST_CASE("stopword and excluded filters preserve order") {
    TokenSequence seq;
    seq.tokens = {"the", "news", "is", "fake"};
    const TokenSequence filtered = remove_stopwords(seq, builtin_stopwords());
    CHECK(filtered.tokens == std::vector<std::string>{"news", "fake"});

    TokenSequence empty;
    CHECK(remove_stopwords(empty, builtin_stopwords()).tokens.empty());

    TokenSequence all_stop;
    all_stop.tokens = {"the", "is", "a"};
    CHECK(remove_stopwords(all_stop, builtin_stopwords()).tokens.empty());

    TokenSequence click;
    click.tokens = {"click", "here", "breaking"};
    const TokenSet excluded = {"click", "here"};
    CHECK(remove_excluded(click, excluded).tokens == std::vector<std::string>{"breaking"});
    CHECK(remove_excluded(click, {}).tokens == click.tokens);
}

TEST_CASE("remove_excluded: output never intersects the excluded set") {
    Rng rng(7);
    const std::vector<std::string> pool = {"alpha", "beta", "gamma", "delta", "epsilon"};
    for (int trial = 0; trial < 100; ++trial) {
        TokenSequence seq;
        const std::size_t len = rng.bounded(12);
        for (std::size_t i = 0; i < len; ++i) seq.tokens.push_back(pool[rng.bounded(pool.size())]);
        TokenSet excluded;
        for (const std::string& p : pool) {
            if (rng.bounded(2) == 1) excluded.insert(p);
        }
        const TokenSequence out = remove_excluded(seq, excluded);
        for (const std::string& tok : out.tokens) CHECK(excluded.count(tok) == 0);
    }
}

namespace {

PrepConfig default_prep() {
    PrepConfig config;
    config.stopword_list = builtin_stopwords();
    return config;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const std::string& t : tokens) {
        if (!out.empty()) out += " ";
        out += t;
    }
    return out;
}

} // namespace

TEST_CASE("preprocess: full cleaning chain on fixtures") {
    const PrepConfig config = default_prep();
    CHECK(preprocess("The running dogs!!!", config).tokens ==
          std::vector<std::string>{"run", "dog"});
    CHECK(preprocess("", config).tokens.empty());
    CHECK(preprocess("the of and", config).tokens.empty());

    PrepConfig with_excluded = config;
    with_excluded.excluded_list = {"breaking"};
    CHECK(preprocess("BREAKING: the dogs are running!", with_excluded).tokens ==
          std::vector<std::string>{"dog", "run"});
}

TEST_CASE("preprocess: token purity and idempotence over generated inputs") {
    const PrepConfig config = default_prep();
    Rng rng(101);
    const std::vector<std::string> words = {"The",   "RUNNING",  "dogs!", "http://x.io",
                                            "100%",  "freely",   "cats",  "owning",
                                            "труд",  "Générale", "it's",  "very,very",
                                            "plastered", "only", "relational", "hopping"};
    for (int trial = 0; trial < 1000; ++trial) {
        std::string text;
        const std::size_t len = rng.bounded(14);
        for (std::size_t i = 0; i < len; ++i) {
            text += words[rng.bounded(words.size())];
            text += rng.bounded(2) ? " " : "  ";
        }
        const TokenSequence out = preprocess(text, config);
        for (const std::string& tok : out.tokens) {
            CHECK(!tok.empty());
            CHECK(tok == lowercase(tok));
            CHECK(tok == stem(tok));
            CHECK(config.stopword_list.count(tok) == 0);
            for (char c : tok) {
                CHECK(c != ' ');
                CHECK(!(c >= '0' && c <= '9'));
                if (static_cast<unsigned char>(c) < 0x80) {
                    CHECK(std::isalpha(static_cast<unsigned char>(c)));
                }
            }
        }
        // rerunning the pipeline over its own output changes nothing
        const TokenSequence again = preprocess(join(out.tokens), config);
        CHECK(again.tokens == out.tokens);
    }
}

TEST_CASE("builtin stopword list is the classic 174-word list") {
    CHECK(builtin_stopwords().size() == 174);
    CHECK(builtin_stopwords().count("the") == 1);
    CHECK(builtin_stopwords().count("very") == 1);
    CHECK(builtin_stopwords().count("news") == 0);
}

TEST_CASE("shipped stoplist file matches the builtin list") {
    const TokenSet from_file = load_token_list(std::string(NEWSFORGE_DATA_DIR) +
                                               "/stopwords_en.txt");
    CHECK(from_file == builtin_stopwords());
}

TEST_CASE("load_token_list: comments, case folding, missing file") {
    testutil::TempDir dir("lists");
    const std::string path = dir.file("words.txt");
    testutil::write_file(path, "# comment line\nAlpha\nbeta # trailing comment\n\ngamma\n");
    const TokenSet list = load_token_list(path);
    CHECK(list == TokenSet{"alpha", "beta", "gamma"});
    CHECK_THROWS_AS(load_token_list(dir.file("missing.txt")), MissingFileError);
}
