from app.dependencies import get_settings


def test_settings_are_read_once():
    assert get_settings() is get_settings()


def test_output_dir_follows_the_environment(output_dir):
    assert get_settings().output_dir == str(output_dir)
