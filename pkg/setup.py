import codecs
from setuptools import setup


with codecs.open('README.rst', encoding='utf-8') as f:
    long_description = f.read()

setup(
    name="exocloak",
    version="0.3.0",
    license='http://www.apache.org/licenses/LICENSE-2.0',
    description="Active exterior cloaking for potential, acoustic and "
                "elastic waves",
    author='exocloak developers',
    packages=['exocloak'],
    install_requires=['numpy>=1.17', 'scipy>=1.7', 'mpmath>=1.1'],
    extras_require={
        'test': ['pytest', 'pycodestyle', 'pyflakes', 'coverage'],
    },
    entry_points="""
    [console_scripts]
    exocloak = exocloak.cli:main
    """,
    classifiers=[
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    long_description=long_description,
)
