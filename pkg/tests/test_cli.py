import numpy as np
import pytest

from crosstrait import io_files
from crosstrait.cli import main
from crosstrait.gwas import marginal_gwas
from crosstrait.synth import (
    CohortSizes,
    TraitArchitecture,
    gen_independent_cohorts,
)


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    """Genotype, phenotype, and summary files for an alpha/eta pair."""
    d = tmp_path_factory.mktemp("data")
    arch = TraitArchitecture.shared_causal(60, 20, phi=0.8, traits=("alpha", "eta"))
    b = gen_independent_cohorts(arch, CohortSizes(n1=120, n3=100), seed=42,
                                traits=("alpha", "eta"))
    paths = {
        "disc_geno": str(d / "disc.xtg"),
        "disc_pheno": str(d / "disc_pheno.tsv"),
        "target_geno": str(d / "target.xtg"),
        "target_pheno": str(d / "target_pheno.tsv"),
        "summary": str(d / "alpha.sumstats.tsv"),
    }
    io_files.write_genotype_bin(paths["disc_geno"], b.disc_alpha)
    io_files.write_phenotype_tsv(paths["disc_pheno"], b.y_alpha.y)
    io_files.write_genotype_bin(paths["target_geno"], b.target)
    io_files.write_phenotype_tsv(paths["target_pheno"], b.y_eta.y)
    stats = marginal_gwas(b.disc_alpha, b.y_alpha.y)
    io_files.write_summary_tsv(paths["summary"], stats)
    return paths


class TestCorrect:
    def test_ab_example(self, capsys):
        rc = main(["correct", "--raw", "0.45", "--n1", "10000", "--n2", "10000",
                   "--p", "10000", "--h2a", "1", "--h2b", "1", "--case", "ab"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        fields = out[1].split("\t")
        assert float(fields[2]) == pytest.approx(0.9)
        assert fields[3] == "consistent_regime"

    def test_zero_raw(self, capsys):
        rc = main(["correct", "--raw", "0", "--n1", "100", "--p", "50",
                   "--h2a", "1", "--h2e", "1", "--case", "ae"])
        assert rc == 0
        assert float(capsys.readouterr().out.splitlines()[1].split("\t")[2]) == 0.0

    def test_r2_published_row(self, capsys):
        rc = main(["correct", "--r2", "0.001974", "--n1", "55374", "--p", "129052",
                   "--h2a", "0.100", "--h2e", "0.660", "--case", "ae"])
        assert rc == 0
        val = float(capsys.readouterr().out.splitlines()[1].split("\t")[2])
        assert val == pytest.approx(0.0727, abs=5e-4)

    def test_missing_flags_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["correct", "--raw", "0.5", "--case", "ab", "--n1", "100"])
        assert exc.value.code == 2

    def test_degenerate_flag_emitted(self, capsys):
        rc = main(["correct", "--raw", "0.05", "--n1", "50", "--n3", "50",
                   "--p", "50000", "--h2a", "1", "--h2e", "1", "--case", "ae"])
        assert rc == 0
        assert "degenerate_regime" in capsys.readouterr().out

    def test_strict_degenerate_refusal(self, capsys):
        rc = main(["correct", "--raw", "0.05", "--n1", "50", "--n3", "50",
                   "--p", "50000", "--h2a", "1", "--h2e", "1", "--case", "ae",
                   "--strict"])
        assert rc == 4


class TestPipelineCommands:
    def test_gwas_then_score(self, small_dataset, tmp_path, capsys):
        out_sum = str(tmp_path / "sum.tsv")
        rc = main(["gwas", "--genotypes", small_dataset["disc_geno"],
                   "--phenotype", small_dataset["disc_pheno"], "--out", out_sum])
        assert rc == 0
        regenerated = io_files.read_summary_tsv(out_sum)
        original = io_files.read_summary_tsv(small_dataset["summary"])
        assert np.array_equal(regenerated.effect, original.effect)

        out_scores = str(tmp_path / "scores.tsv")
        rc = main(["score", "--genotypes", small_dataset["target_geno"],
                   "--summary", out_sum, "--out", out_scores,
                   "--rule", "pvalue", "--cutoff", "0.5"])
        assert rc == 0
        scores, _ = io_files.read_scores_tsv(out_scores)
        assert scores.shape == (100,)
        assert np.linalg.norm(scores) > 0

    def test_estimate_ae(self, small_dataset, tmp_path, capsys):
        out = str(tmp_path / "est.tsv")
        rc = main(["estimate", "--case", "ae",
                   "--target-geno", small_dataset["target_geno"],
                   "--target-pheno", small_dataset["target_pheno"],
                   "--summary-a", small_dataset["summary"],
                   "--n1", "120", "--n3", "100", "--p", "60",
                   "--h2a", "1", "--h2e", "1", "--out", out])
        assert rc == 0
        text = open(out).read().splitlines()
        fields = text[1].split("\t")
        raw, factor, corrected = float(fields[1]), float(fields[2]), float(fields[3])
        assert corrected == pytest.approx(raw / factor)

    def test_estimate_summary_ab_missing_file_flags(self, small_dataset):
        with pytest.raises(SystemExit) as exc:
            main(["estimate", "--case", "summary-ab", "--summary-a",
                  small_dataset["summary"], "--n1", "120", "--n2", "120",
                  "--p", "60", "--h2a", "1", "--h2b", "1"])
        assert exc.value.code == 2

    def test_malformed_file_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("snp_id\teffect\tse\ttstat\tpvalue\tn\nrs1\tx\t1\t1\t0.5\t10\n")
        rc = main(["score", "--genotypes", str(bad), "--summary", str(bad),
                   "--out", str(tmp_path / "out.tsv")])
        assert rc == 3

    def test_missing_file_is_data_error(self, tmp_path):
        rc = main(["gwas", "--genotypes", str(tmp_path / "nope.xtg"),
                   "--phenotype", str(tmp_path / "nope.tsv"),
                   "--out", str(tmp_path / "o.tsv")])
        assert rc == 3


class TestMomentsCommand:
    def test_single_tag_report(self, tmp_path, capsys):
        out = str(tmp_path / "report.tsv")
        rc = main(["moments", "--tag", "cov_ae_num", "--n1", "150", "--n3", "150",
                   "--p", "300", "--m", "60", "--rho", "0.6",
                   "--replicates", "40", "--seed", "1", "--out", out])
        assert rc == 0
        lines = open(out).read().splitlines()
        assert lines[0].split("\t") == io_files.MOMENT_HEADER
        z = float(lines[1].split("\t")[4])
        assert abs(z) < 4


class TestSimulateCommand:
    def test_config_run_and_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "scenario=fig2_all_snp\np=80\nn1=60\nn2=60\nn3=60\nm=20\n"
            "phi_grid=0.5\nreplicates=2\nmaster_seed=3\n"
        )
        out = tmp_path / "out"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        rows = io_files.read_replicates_tsv(str(out / "replicates.tsv"))
        assert len(rows) == 6  # 3 estimators x 2 replicates
        assert (out / "aggregates.tsv").exists()
        assert (out / "manifest.txt").exists()

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("scenario=fig2_all_snp\np=80\nn1=60\nwat=1\n")
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 2
