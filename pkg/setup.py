#!/usr/bin/env python

try:
    from setuptools import setup
except ImportError:
    print('[mgtc] setuptools not found.')
    raise

with open('mgtc/constants.py') as fh:
    for line in fh:
        line = line.strip()
        if line.startswith('__VERSION__'):
            version = line.split()[-1][1:-1]
            break

with open('requirements.txt') as fh:
    install_requires = [line.strip() for line in fh
                        if line.strip() and not line.startswith('#')]

setup(
    name='mgtc',
    version=version,
    license='MIT License',
    description='Multi-grained text classification of procedural texts '
                'and process model extraction.',
    packages=['mgtc', 'mgtc.assembler', 'mgtc.corpus', 'mgtc.evaluator',
              'mgtc.helpers', 'mgtc.nn'],
    install_requires=install_requires,
    extras_require={'test': ['pytest>=6.0']},
    entry_points={
        'console_scripts': ['mgtc = mgtc.cli:main'],
    },
)
