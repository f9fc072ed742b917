"""Canonical program corpus: the programs printed in the shipped prompt
templates and fixture module docstrings, in canonical one-statement-per-line
form. Full programs end in RESULT; fragments are single usage statements."""

PURSE_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='person')\n"
    "IMAGE0=CROP_LEFTOF(image=IMAGE,box=BOX0)\n"
    "BOX1=LOC(image=IMAGE0,object='purse')\n"
    "ANSWER0=COUNT(box=BOX1)\n"
    "ANSWER1=EVAL(expr=f\"'left' if {ANSWER0} > 0 else 'right'\")\n"
    "FINAL_RESULT=RESULT(var=ANSWER1)"
)

COMPARE_SIZE_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='sphere')\n"
    "BOX1=LOC(image=IMAGE,object='blue cube')\n"
    "FLAG0=COMPARE_SIZE(image=IMAGE,box0=BOX0,box1=BOX1)\n"
    "ANSWER2=EVAL(expr=f\"'sphere' if {FLAG0} else 'blue cube'\")\n"
    "FINAL_RESULT=RESULT(var=ANSWER2)"
)

VEHICLE_TOP_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='TOP')\n"
    "IMAGE0=CROP(image=IMAGE,box=BOX0)\n"
    "BOX1=LOC(image=IMAGE0,object='vehicle')\n"
    "ANSWER0=COUNT(box=BOX1)\n"
    "ANSWER1=EVAL(expr=f\"'yes' if {ANSWER0} > 0 else 'no'\")\n"
    "FINAL_RESULT=RESULT(var=ANSWER1)"
)

UMBRELLA_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='umbrella')\n"
    "IMAGE0=CROP(image=IMAGE,box=BOX0)\n"
    "ANSWER0=VQA(image=IMAGE0,question='Who is carrying the umbrella?')\n"
    "FINAL_RESULT=RESULT(var=ANSWER0)"
)

TOWEL_BOX_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='towel')\n"
    "BOX1=LOC(image=IMAGE,object='box')\n"
    "ANSWER0=COMPARE_ATTRIBUTE(image=IMAGE,box1=BOX0,box2=BOX1,object1='towel',"
    "object2='box',attribute='color',question=QUESTION)\n"
    "FINAL_RESULT=RESULT(var=ANSWER0)"
)

KNIFE_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='knife')\n"
    "ANSWER0=VERIFY_MATERIAL(image=IMAGE,box=BOX0,material='ceramic',object='knife',"
    "question=QUESTION)\n"
    "ANSWER1=EVAL(expr=f\"'yes' if {ANSWER0} else 'no'\")\n"
    "FINAL_RESULT=RESULT(var=ANSWER1)"
)

COAT_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='coat')\n"
    "ANSWER0=CHOOSE_ATTRIBUTE(image=IMAGE,box=BOX0,object='coat',attribute1='thick',"
    "attribute2='thin')\n"
    "FINAL_RESULT=RESULT(var=ANSWER0)"
)

# same chain as COAT_PROGRAM but binding the choice to a fresh result variable,
# as printed inside the module docstring example
COAT_DOC_PROGRAM = (
    "BOX0=LOC(image=IMAGE,object='coat')\n"
    "ANSWER0=CHOOSE_ATTRIBUTE(image=IMAGE,box=BOX0,object='coat',attribute1='thick',"
    "attribute2='thin')\n"
    "FINAL_RESULT=RESULT(var=ANSWER0)"
)

SANDWICH_PROGRAM = (
    "BOXLIST0=LOC(image=IMAGE,object='sandwich')\n"
    "BOXLIST1=SORT_SPATIAL(image=IMAGE,box_list=BOXLIST0,location='right',index=2)\n"
    "BOXLIST2=SORT_SPATIAL(image=IMAGE,box_list=BOXLIST1,location='bottom',index=1)\n"
    "FINAL_RESULT=RESULT(var=BOXLIST2)"
)

CAMEL_FRAGMENT = "BOX0=LOC(image=IMAGE,object='camel')"
COUNT_FRAGMENT = "ANSWER0=COUNT(box=BOX1)"
FOOD_FRAGMENT = "BOX1=LOC(image=IMAGE0,object='food')"

VQA_BINDINGS = {"IMAGE": "image", "QUESTION": "text"}

# (name, text, is_full_program, initial bindings for validation)
CORPUS = [
    ("purse", PURSE_PROGRAM, True, VQA_BINDINGS),
    ("compare-size", COMPARE_SIZE_PROGRAM, True, VQA_BINDINGS),
    ("vehicle-top", VEHICLE_TOP_PROGRAM, True, VQA_BINDINGS),
    ("umbrella", UMBRELLA_PROGRAM, True, VQA_BINDINGS),
    ("towel-box", TOWEL_BOX_PROGRAM, True, VQA_BINDINGS),
    ("knife", KNIFE_PROGRAM, True, VQA_BINDINGS),
    ("coat", COAT_PROGRAM, True, VQA_BINDINGS),
    ("coat-doc", COAT_DOC_PROGRAM, True, VQA_BINDINGS),
    ("sandwich", SANDWICH_PROGRAM, True, {"IMAGE": "image", "EXPRESSION": "text"}),
    ("camel-fragment", CAMEL_FRAGMENT, False, {"IMAGE": "image"}),
    ("count-fragment", COUNT_FRAGMENT, False, {"BOX1": "box-list"}),
    ("food-fragment", FOOD_FRAGMENT, False, {"IMAGE0": "image"}),
]
