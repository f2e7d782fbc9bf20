def test_import():
    import smattn  # noqa: F401
