def parse_args(argv):
    """Parse command line arguments."""
    return [a for a in argv if a]
