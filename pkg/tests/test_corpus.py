import numpy as np
import pytest

from vidmem import corpus


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestFeatureLoader:
    def test_groups_rows_by_video(self, tmp_path):
        p = write(tmp_path, "f.csv", "v1,0.1,0.2\nv1,0.3,0.4\n")
        fs = corpus.load_feature_csv(p, "video", "C3D")
        assert fs.dimension == 2
        assert fs.rows["v1"].shape == (2, 2)
        np.testing.assert_array_equal(fs.rows["v1"], [[0.1, 0.2], [0.3, 0.4]])

    def test_dimension_mismatch_reports_line(self, tmp_path):
        p = write(tmp_path, "f.csv", "v1,0.1\nv2,0.1,0.2\n")
        with pytest.raises(corpus.ParseError) as exc:
            corpus.load_feature_csv(p, "video", "C3D")
        assert exc.value.line_no == 2

    def test_non_numeric_field(self, tmp_path):
        p = write(tmp_path, "f.csv", "v1,abc\n")
        with pytest.raises(corpus.ParseError):
            corpus.load_feature_csv(p, "video", "C3D")

    def test_empty_file(self, tmp_path):
        p = write(tmp_path, "f.csv", "")
        with pytest.raises(corpus.ParseError):
            corpus.load_feature_csv(p, "video", "C3D")

    def test_per_second_audio_rows(self, tmp_path):
        # a 6-second video yields one row per second
        lines = "".join(f"v1,{','.join(['0.5'] * 128)}\n" for _ in range(6))
        fs = corpus.load_feature_csv(write(tmp_path, "a.csv", lines), "audio", "VGGish")
        assert fs.dimension == 128
        assert len(fs.rows["v1"]) == 6

    def test_round_trip(self, tmp_path):
        p = write(tmp_path, "f.csv", "v1,0.125,0.25\nv2,-1.5,3.0\nv1,0.5,0.75\n")
        fs = corpus.load_feature_csv(p, "image", "VGG")
        out = tmp_path / "out.csv"
        corpus.write_feature_csv(fs, out)
        fs2 = corpus.load_feature_csv(out, "image", "VGG")
        assert list(fs.rows) == list(fs2.rows)
        for vid in fs.rows:
            np.testing.assert_array_equal(fs.rows[vid], fs2.rows[vid])


class TestAnnotationLoader:
    def test_basic(self, tmp_path):
        p = write(tmp_path, "a.csv", "v1,75,1\nv1,80,0\n")
        log = corpus.load_annotations_csv(p)
        assert len(log.entries["v1"]) == 2
        assert log.entries["v1"][0].recognized == 1

    def test_nonpositive_delay(self, tmp_path):
        p = write(tmp_path, "a.csv", "v1,0,1\n")
        with pytest.raises(corpus.ParseError):
            corpus.load_annotations_csv(p)

    def test_fractional_delay_ok(self, tmp_path):
        p = write(tmp_path, "a.csv", "v1,74.96,1\n")
        log = corpus.load_annotations_csv(p)
        assert log.entries["v1"][0].delay_seconds == 74.96

    def test_bad_recognized(self, tmp_path):
        p = write(tmp_path, "a.csv", "v1,75,2\n")
        with pytest.raises(corpus.ParseError):
            corpus.load_annotations_csv(p)


class TestLabelLoader:
    def test_basic(self, tmp_path):
        t = corpus.load_labels_csv(write(tmp_path, "l.csv", "v1,0.85\n"), "short")
        assert t.scores == {"v1": 0.85}

    def test_out_of_range(self, tmp_path):
        with pytest.raises(corpus.ParseError):
            corpus.load_labels_csv(write(tmp_path, "l.csv", "v1,1.2\n"), "short")


class TestCaptionLoader:
    def test_quoted_commas(self, tmp_path):
        p = write(tmp_path, "c.csv", 'v1,"a man, running"\nv1,a dog\n')
        cs = corpus.load_captions_csv(p)
        assert cs.captions["v1"] == ("a man, running", "a dog")

    def test_too_many_captions(self, tmp_path):
        p = write(tmp_path, "c.csv", "".join(f"v1,cap {i}\n" for i in range(6)))
        with pytest.raises(corpus.ParseError):
            corpus.load_captions_csv(p)


class TestWordVectorLoader:
    def test_dimension_inferred(self, tmp_path):
        floats = " ".join(["0.1"] * 300)
        p = write(tmp_path, "wv.txt", f"the {floats}\nCat {floats}\n")
        t = corpus.load_word_vectors(p)
        assert t.dimension == 300
        assert t.get("THE") is not None
        assert t.get("cat") is not None  # lowercased at load

    def test_arity_error_carries_line(self, tmp_path):
        p = write(tmp_path, "wv.txt", "a 0.1 0.2\nb 0.3\n")
        with pytest.raises(corpus.ParseError) as exc:
            corpus.load_word_vectors(p)
        assert exc.value.line_no == 2
