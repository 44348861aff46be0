import pytest

from fracpoisson.config import DEFAULT_TOL, Settings, get_settings
from fracpoisson.errors import ConfigError, DomainError


def test_defaults(clean_env):
    settings = get_settings()
    assert settings == Settings()
    assert settings.tol == DEFAULT_TOL
    assert settings.cancellation_guard == 1e8


def test_environment_overrides(clean_env):
    clean_env.setenv('FRACPOISSON_TOL', '1e-10')
    clean_env.setenv('FRACPOISSON_MAX_EVALS', '5000')
    clean_env.setenv('FRACPOISSON_LOG_LEVEL', 'debug')
    settings = get_settings()
    assert settings.tol == 1e-10
    assert settings.max_evals == 5000
    assert settings.log_level == 'DEBUG'


def test_blank_values_fall_back(clean_env):
    clean_env.setenv('FRACPOISSON_SERIES_MAX_TERMS', '  ')
    assert get_settings().series_max_terms == Settings.series_max_terms


@pytest.mark.parametrize('name, raw', [
    ('FRACPOISSON_TOL', 'abc'),
    ('FRACPOISSON_TOL', '-1'),
    ('FRACPOISSON_MAX_EVALS', '1.5'),
    ('FRACPOISSON_SERIES_MAX_TERMS', '0'),
])
def test_malformed_values(clean_env, name, raw):
    clean_env.setenv(name, raw)
    with pytest.raises(ConfigError) as info:
        get_settings()
    assert name in str(info.value)
    assert isinstance(info.value, DomainError)


def test_dotenv_in_working_directory(clean_env, tmp_path):
    (tmp_path / '.env').write_text('FRACPOISSON_CANCELLATION_GUARD=1e6\n')
    # record the variable so the value load_dotenv writes is undone afterwards
    clean_env.setenv('FRACPOISSON_CANCELLATION_GUARD', '1')
    clean_env.delenv('FRACPOISSON_CANCELLATION_GUARD')
    assert get_settings().cancellation_guard == 1e6


@pytest.mark.parametrize('raw', ['0.5', '1e-2', '1e-15', 'inf'])
def test_tolerance_outside_accepted_range(clean_env, raw):
    clean_env.setenv('FRACPOISSON_TOL', raw)
    with pytest.raises(ConfigError) as info:
        get_settings()
    assert 'FRACPOISSON_TOL' in str(info.value)
