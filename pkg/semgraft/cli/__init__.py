# command-line interface
