#!/usr/bin/env python


from setuptools import find_packages, setup

setup(
    name='pan-lib',
    version='0.1.0',
    description='Penalty adversarial networks for PDE-constrained optimal control',
    author='propellor-app',
    author_email='',
    packages=find_packages(exclude=['tests', 'tests.*']),
    install_requires=['numpy', 'pandas'],
    entry_points={'console_scripts': ['pan=pan.cli:main']},
    python_requires='>=3.8',
    license='MIT'
)
