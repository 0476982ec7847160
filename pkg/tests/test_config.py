import pytest
from config import CONFIG_ENV, RunConfig, load_run_config, read_config_file
from errors import UsageError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "regseq.conf"
    path.write_text("spec = 2*x\nretries = 3\nmode = strict\nprecision-cap = 512\n",
                    encoding="utf-8")
    return path


def test_defaults(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    config = load_run_config()
    assert config == RunConfig()
    assert (config.precision_cap_bits, config.retries, config.budget) == (2 ** 15, 25, 10 ** 6)
    assert config.mode == "relaxed" and config.output == "json"


def test_file_values(config_file):
    assert read_config_file(config_file) == {
        "spec_text": "2*x", "retries": "3", "mode": "strict",
        "precision_cap_bits": "512"}
    config = load_run_config(path=config_file)
    assert (config.spec_text, config.retries, config.mode,
            config.precision_cap_bits) == ("2*x", 3, "strict", 512)


def test_overrides_win_over_file(config_file):
    config = load_run_config({"retries": 7, "mode": None}, config_file)
    assert config.retries == 7
    assert config.mode == "strict"


def test_env_points_at_file(monkeypatch, config_file):
    monkeypatch.setenv(CONFIG_ENV, str(config_file))
    assert load_run_config().spec_text == "2*x"


@pytest.mark.parametrize("text", ["retries = 500\n", "precision_cap_bits = 8\n",
                                  "colour = red\n", "chunk = 1\n"])
def test_invalid_values(tmp_path, text):
    path = tmp_path / "bad.conf"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(UsageError):
        load_run_config(path=path)


def test_missing_file(tmp_path):
    with pytest.raises(UsageError):
        read_config_file(tmp_path / "absent.conf")
