#!/usr/bin/env python3
# main.py
from pressurelab.commands import cli

if __name__ == '__main__':
    cli()
