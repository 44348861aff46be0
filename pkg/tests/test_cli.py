import json

import pytest

from fracpoisson.app import EXIT_DOMAIN, EXIT_NUMERICAL, main, parse_n_range, parse_t_range, parse_z_range

pytestmark = pytest.mark.usefixtures('clean_env')


def invoke(runner, *args, env=None):
    return runner.invoke(main, list(args), env=env)


class TestRanges:
    def test_n_range_doubles(self):
        assert parse_n_range('16..4096') == [16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
        assert parse_n_range('3..20') == [3, 6, 12]
        assert parse_n_range('4,0,2,2') == [0, 2, 4]

    def test_n_range_rejects(self):
        for value in ('0..8', '8..4', '1.5', '-1', ''):
            with pytest.raises(ValueError):
                parse_n_range(value)

    def test_n_range_rejects_non_finite(self):
        for value in ('16..inf', 'nan..16', '1e400', 'inf', '4,nan'):
            with pytest.raises(ValueError):
                parse_n_range(value)

    def test_n_range_ceiling(self):
        assert parse_n_range('16..4096', max_n=4096)[-1] == 4096
        with pytest.raises(ValueError):
            parse_n_range('16..8192', max_n=4096)
        with pytest.raises(ValueError):
            parse_n_range('1e300')

    def test_t_range_is_log_spaced(self):
        values = parse_t_range('1..100')
        assert len(values) == 9
        assert values[0] == pytest.approx(1.0)
        assert values[4] == pytest.approx(10.0)
        assert parse_t_range('0,2') == [0.0, 2.0]

    def test_z_range_is_evenly_spaced(self):
        assert parse_z_range('0..4') == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])


def test_mwright_at_zero(runner):
    result = invoke(runner, 'mwright', '--beta', '0.5', '--z', '0')
    assert result.exit_code == 0, result.output
    assert result.output == 'beta,z,value\n0.5,0,0.564189583547756\n'


def test_output_is_deterministic(runner):
    args = ('marginals', '--beta', '0.5', '--t', '1', '--n', '0,1')
    first = invoke(runner, *args)
    second = invoke(runner, *args)
    assert first.exit_code == 0, first.output
    assert first.output == second.output
    lines = first.output.splitlines()
    assert lines[0] == 'beta,model,t,n,value,abs_err_est,z_max,n_evals'
    assert len(lines) == 3
    assert lines[1].startswith('0.5,linear:lambda=1,1,0,0.42758')


def test_json_format(runner):
    result = invoke(runner, 'poisson', '--z0', '1', '--n', '16,64', '--format', 'json')
    assert result.exit_code == 0, result.output
    rows = json.loads(result.output)
    assert [row['n'] for row in rows] == [16, 64]
    assert set(rows[0]) == {'z0', 'n', 't', 'scaled_value'}
    assert rows[1]['scaled_value'] == pytest.approx(0.3983, abs=1e-3)


def test_output_file(runner, tmp_path):
    target = tmp_path / 'moments.csv'
    result = invoke(runner, 'moments', '--beta', '0.5', '--k', '0,1', '--output', str(target))
    assert result.exit_code == 0, result.output
    lines = target.read_text().splitlines()
    assert lines[0] == 'beta,k,value,exact,abs_err_est'
    assert len(lines) == 3


@pytest.mark.parametrize('args', [
    ('mwright', '--beta', '1.0'),
    ('mwright', '--beta', '1.5'),
    ('mwright', '--beta', '0.5', '--z', '-1'),
    ('marginals', '--beta', '0.5', '--model', 'quadratic:a=1', '--t', '1'),
    ('marginals', '--beta', '0.5', '--model', 'powerlaw:scale=1', '--t', '1'),
    ('marginals', '--beta', '0.5'),
    ('scaling', '--beta', '0.5', '--z0', '0'),
    ('scaling', '--beta', '0.5', '--z0', '1', '--n', '0..16'),
    ('residual', '--beta', '0.5', '--h', '0.3'),
    ('mwright', '--beta', '0.5', '--tol', '1'),
    ('poisson', '--z0', '1', '--n', '1e400'),
    ('poisson', '--z0', '1', '--n', '16..inf'),
    ('scaling', '--beta', '0.5', '--z0', '1', '--n', '16..8192'),
    ('saddle', '--beta', '0.5', '--z0', '1', '--n', '5000'),
])
def test_invalid_flags_exit_with_domain_code(runner, args):
    result = invoke(runner, *args)
    assert result.exit_code == EXIT_DOMAIN


def test_numerical_failure_exit_code(runner):
    result = invoke(runner, 'marginals', '--beta', '0.5', '--t', '1', '--n', '1',
                    env={'FRACPOISSON_SERIES_ABS_TOL': '1e-3'})
    assert result.exit_code == EXIT_NUMERICAL
    assert 'numerical failure in marginals' in result.output


def test_bad_configuration(runner):
    result = invoke(runner, 'mwright', '--beta', '0.5', env={'FRACPOISSON_TOL': 'abc'})
    assert result.exit_code == EXIT_DOMAIN
    assert 'configuration error' in result.output


def test_out_of_range_tolerance_in_environment(runner):
    result = invoke(runner, 'marginals', '--beta', '0.5', '--t', '1', '--n', '0',
                    env={'FRACPOISSON_TOL': '0.5'})
    assert result.exit_code == EXIT_DOMAIN
    assert 'FRACPOISSON_TOL' in result.output


def test_saddle_columns(runner):
    result = invoke(runner, 'saddle', '--beta', '0.5', '--z0', '1', '--n', '16,256')
    assert result.exit_code == 0, result.output
    header, *rows = result.output.splitlines()
    assert header.split(',')[-2:] == ['saddle_value', 'limit_value']
    assert len(rows) == 2


def test_residual_without_model(runner):
    result = invoke(runner, 'residual', '--beta', '0.5', '--n', '0', '--h', '0.0625', '--horizon', '1')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == 'beta,model,n,h,t,lhs,rhs,residual'
    assert len(lines) == 17
