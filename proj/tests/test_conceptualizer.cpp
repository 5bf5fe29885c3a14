// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <set>

#include "common/error.hpp"
#include "conceptualizer/overlay.hpp"
#include "support.hpp"

using namespace vqar;
using namespace vqar::testing;

namespace {

const Rgb kWhite{255, 255, 255};

std::set<std::pair<int, int>> changed_pixels(const Image& before, const Image& after) {
    std::set<std::pair<int, int>> out;
    for (int y = 0; y < before.height(); ++y)
        for (int x = 0; x < before.width(); ++x)
            if (!(before.at(x, y) == after.at(x, y))) out.insert({x, y});
    return out;
}

// Stroke band of an inclusive rectangle, computed without the overlay code.
std::set<std::pair<int, int>> stroke_band(int x0, int y0, int x1, int y1, int sw) {
    std::set<std::pair<int, int>> out;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (x < x0 + sw || x > x1 - sw || y < y0 + sw || y > y1 - sw) out.insert({x, y});
    return out;
}

std::set<std::pair<int, int>> rect(int x0, int y0, int x1, int y1) {
    std::set<std::pair<int, int>> out;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) out.insert({x, y});
    return out;
}

ConceptualizerConfig sequential() {
    ConceptualizerConfig c;
    c.parallel_segmentation = false;
    return c;
}

}  // namespace

TEST_CASE("extraction prompt is the fixed template") {
    CHECK(extraction_prompt("Which jersey number?", 5) ==
          "Extract the physical objects or visual elements that must be located in an image to answer this "
          "question. Reply with a comma-separated list of at most 5 short noun phrases, or NONE if no object is "
          "named. Question: Which jersey number?");
}

TEST_CASE("parse_keywords") {
    CHECK(parse_keywords("jersey, number", 5) == std::vector<std::string>{"jersey", "number"});
    CHECK(parse_keywords("NONE", 5).empty());
    CHECK(parse_keywords("none.", 5).empty());
    CHECK(parse_keywords("", 5).empty());
    CHECK(parse_keywords("Dog, dog , CAT", 5) == std::vector<std::string>{"dog", "cat"});
    CHECK(parse_keywords("a, b, c, d, e, f", 3) == std::vector<std::string>{"a", "b", "c"});
    CHECK(parse_keywords("\"red car\", the tall tree.", 5) == std::vector<std::string>{"red car", "the tall tree"});
    CHECK(parse_keywords("I am not sure what objects are needed to answer this question", 5).empty());
}

TEST_CASE("extract_keywords runs one cold call") {
    const std::string q = "What number is on the jersey?";
    ScriptBuilder sb;
    sb.keywords(q, "jersey, number", 30.0);
    MockChatClient lm(sb.shared());
    const auto k = extract_keywords(q, lm, 5);
    CHECK(k.keywords.keywords == std::vector<std::string>{"jersey", "number"});
    CHECK(k.keywords.source_question == q);
    CHECK(k.latency_ms == 30.0);
    CHECK(lm.calls() == 1);
    CHECK_THROWS_AS(extract_keywords("  ", lm, 5), Error);
}

TEST_CASE("locate makes one call per keyword") {
    const ImageRef img = white_image();
    ScriptBuilder sb;
    sb.segment("dog", {det("dog", 0.9)}, 50.0).segment("frisbee", {det("frisbee", 0.8, {50, 50, 70, 70})}, 40.0);
    sb.segment("cat", {det("cat", 0.65)});
    MockSegmentationClient seg(sb.shared());

    Localization loc = locate(img, KeywordSet{{"dog", "frisbee"}, ""}, seg, 0.7, true);
    CHECK(loc.detections.size() == 2);
    CHECK(loc.calls == 2);
    CHECK(loc.wall_ms == 50.0);
    CHECK(loc.detections[0].label == "dog");

    loc = locate(img, KeywordSet{{"dog", "frisbee"}, ""}, seg, 0.7, false);
    CHECK(loc.wall_ms == 90.0);

    loc = locate(img, KeywordSet{}, seg);
    CHECK(loc.detections.empty());
    CHECK(loc.calls == 0);

    loc = locate(img, KeywordSet{{"cat"}, ""}, seg);
    CHECK(loc.detections.empty());
    CHECK(loc.calls == 1);
    CHECK(seg.calls() == 5);
}

TEST_CASE("a failed keyword counts as no detections") {
    const ImageRef img = white_image();
    MockScript s;
    s.add_segmentation("dog", {seg_reply({det("dog", 0.9)})});
    MockSegmentationReply bad;
    bad.error = "backend";
    s.add_segmentation("ball", {bad});
    MockSegmentationClient seg(std::make_shared<MockScript>(s));
    const Localization loc = locate(img, KeywordSet{{"ball", "dog"}, ""}, seg);
    CHECK(loc.detections.size() == 1);
    CHECK(loc.calls == 2);
    CHECK(loc.failures.size() == 1);
}

TEST_CASE("one detection on a white 100x100 image changes exactly the stroke and tag pixels") {
    const ImageRef img = white_image(100, 100);
    const AnnotatedImage out = composite(img, {det("dog", 0.9, {10, 10, 40, 40})}, OverlayStyle{});
    REQUIRE(out.media_type == "image/png");
    const Image before = decode_image(img.view());
    const Image after = decode_image(out.rendered);

    // Box covers pixels 10..39; 3 px stroke. Tag "DOG": 3 glyphs of 6 px
    // advance minus the trailing gap, plus 1 px padding each side, i.e.
    // 19 x 9, sitting directly above the box at rows 1..9.
    auto expected = stroke_band(10, 10, 39, 39, 3);
    const auto tag = rect(10, 1, 28, 9);
    expected.insert(tag.begin(), tag.end());
    CHECK(expected.size() == 324 + 171);
    CHECK(changed_pixels(before, after) == expected);
    CHECK(after.at(10, 10) == overlay_palette()[0]);
    CHECK(after.at(11, 1) == overlay_palette()[0]);  // padding row keeps the fill color
}

TEST_CASE("tag moves inside the box at the top edge") {
    const PixelRect box = box_pixels({0, 0, 30, 30}, 100, 100);
    const auto tag = tag_rect(box, "cat", OverlayStyle{}, 100, 100);
    REQUIRE(tag);
    CHECK(*tag == PixelRect{0, 0, 18, 8});
    OverlayStyle no_tags;
    no_tags.draw_tags = false;
    CHECK_FALSE(tag_rect(box, "cat", no_tags, 100, 100));
    CHECK_FALSE(tag_rect(box, "", OverlayStyle{}, 100, 100));
    OverlayStyle short_tags;
    short_tags.max_label_chars = 2;
    CHECK(tag_text("cat", short_tags) == "ca");
}

TEST_CASE("overlays only touch pixels near their boxes") {
    std::mt19937 rng(3);
    const OverlayStyle style;
    for (int trial = 0; trial < 40; ++trial) {
        const int x0 = static_cast<int>(rng() % 70), y0 = static_cast<int>(rng() % 70);
        const int x1 = x0 + 5 + static_cast<int>(rng() % 25), y1 = y0 + 5 + static_cast<int>(rng() % 25);
        const Box b{double(x0), double(y0), double(x1), double(y1)};
        const ImageRef img = white_image(100, 100);
        const AnnotatedImage out = composite(img, {det("obj", 0.9, b)}, style);
        const auto changed = changed_pixels(decode_image(img.view()), decode_image(out.rendered));

        auto allowed = stroke_band(x0, y0, std::min(x1, 100) - 1, std::min(y1, 100) - 1, style.stroke_width);
        const PixelRect box = box_pixels(b, 100, 100);
        if (auto t = tag_rect(box, "obj", style, 100, 100)) {
            const auto tag = rect(t->x0, t->y0, t->x1, t->y1);
            allowed.insert(tag.begin(), tag.end());
        }
        CHECK(changed == allowed);
    }
}

TEST_CASE("composite is deterministic and keeps zero-detection inputs byte-identical") {
    const ImageRef img = white_image(60, 40);
    const std::vector<Detection> dets = {det("a", 0.9, {5, 5, 20, 20}), det("b", 0.8, {25, 10, 55, 35})};
    const AnnotatedImage a = composite(img, dets, OverlayStyle{});
    const AnnotatedImage b = composite(img, dets, OverlayStyle{});
    CHECK(a.rendered == b.rendered);
    CHECK(a.overlays.size() == 2);
    CHECK(decode_image(a.rendered).at(25, 10) == overlay_palette()[1]);

    const AnnotatedImage none = composite(img, {}, OverlayStyle{});
    CHECK(none.rendered == *img.bytes);
    CHECK(none.as_image_ref().bytes == img.bytes);

    // Boxes that clamp to nothing are dropped, which is the zero case again.
    const AnnotatedImage outside = composite(img, {det("x", 0.9, {100, 100, 120, 120})}, OverlayStyle{});
    CHECK(outside.overlays.empty());
    CHECK(outside.rendered == *img.bytes);
}

TEST_CASE("degenerate conceptualizer paths return the input bytes") {
    testing::TempDir dir;
    const ImageRef img = ImageRef::load(write_png(dir / "in.png", 80, 60).string());
    const std::string q = "Where is the dog?";

    SUBCASE("NONE keywords") {
        ScriptBuilder sb;
        sb.keywords(q, "NONE");
        MockBackends mb(sb.shared());
        const auto c = conceptualize(img, q, *mb.lm, *mb.seg, sequential());
        CHECK(c.image.rendered == *img.bytes);
        CHECK(c.seg_calls == 0);
        CHECK(mb.seg->calls() == 0);
        CHECK(c.lm_calls == 1);
    }
    SUBCASE("all scores below the threshold") {
        ScriptBuilder sb;
        sb.keywords(q, "dog").segment("dog", {det("dog", 0.65), det("dog", 0.3)});
        MockBackends mb(sb.shared());
        const auto c = conceptualize(img, q, *mb.lm, *mb.seg, sequential());
        CHECK(c.image.rendered == *img.bytes);
        CHECK(c.seg_calls == 1);
        CHECK(c.detections.empty());
    }
    SUBCASE("segmentation errors") {
        ScriptBuilder sb;
        sb.keywords(q, "dog, leash");
        MockSegmentationReply bad;
        bad.error = "transport";
        sb.script.add_segmentation("dog", {bad}, true);
        sb.script.add_segmentation("leash", {bad}, true);
        MockBackends mb(sb.shared());
        const auto c = conceptualize(img, q, *mb.lm, *mb.seg, sequential());
        CHECK(c.image.rendered == *img.bytes);
        CHECK(c.seg_calls == 2);
        CHECK(c.notes.size() >= 2);
    }
    SUBCASE("keyword model failure") {
        ScriptBuilder sb;
        sb.script.add_chat_text(keyword_parts(q), 0.0, {error_reply("backend")});
        MockBackends mb(sb.shared());
        const auto c = conceptualize(img, q, *mb.lm, *mb.seg, sequential());
        CHECK(c.image.rendered == *img.bytes);
        CHECK(c.keywords.empty());
        CHECK(c.seg_calls == 0);
    }
}

TEST_CASE("overlay set is the union of surviving detections per keyword") {
    const ImageRef img = white_image(100, 100);
    const std::string q = "Is the dog chasing the frisbee?";
    ScriptBuilder sb;
    sb.keywords(q, "dog, frisbee")
        .segment("dog", {det("dog", 0.9, {5, 20, 30, 50}), det("dog", 0.5, {60, 60, 70, 70})})
        .segment("frisbee", {det("frisbee", 0.75, {50, 10, 70, 25}), det("frisbee", 0.95, {40, 40, 60, 60})});
    MockBackends mb(sb.shared());
    const auto c = conceptualize(img, q, *mb.lm, *mb.seg, ConceptualizerConfig{});
    REQUIRE(c.detections.size() == 3);
    CHECK(c.detections[0].label == "dog");
    CHECK(c.detections[1].score == 0.95);
    CHECK(c.detections[2].score == 0.75);
    CHECK(c.image.overlays.size() == 3);
    CHECK(c.image.media_type == "image/png");
    CHECK(c.image.rendered != *img.bytes);
    CHECK(c.seg_calls == 2);
    CHECK(mb.seg->calls() == 2);
    CHECK(mb.lm->calls() == 1);
}

TEST_CASE("undecodable images are rejected") {
    ImageRef bogus;
    bogus.bytes = std::make_shared<const std::vector<std::uint8_t>>(std::vector<std::uint8_t>{1, 2, 3});
    ScriptBuilder sb;
    MockBackends mb(sb.shared());
    CHECK_THROWS_AS(conceptualize(bogus, "q?", *mb.lm, *mb.seg, ConceptualizerConfig{}), Error);
}
