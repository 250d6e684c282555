from os import system as cmd

cmd("poetry build")
cmd("poetry publish")
